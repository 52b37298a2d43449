"""A-contrario alignment detection in dot patterns and Gabor fields."""

from .dots import DotPattern, DotDetection, RectCandidate, detect_basic, detect_refined
from .gabor import GaborField, GaborReport, detect_gabor
from .masking import GestaltCandidate, exclusion_filter, masking_filter
from .stats import binom_tail, is_meaningful, log10_binom_tail, nfa_from
from .stimuli import StimulusSpec, StimulusRecord, gen_dot_scene, gen_negative, gen_positive

__all__ = [
    "DotPattern", "DotDetection", "RectCandidate", "detect_basic",
    "detect_refined", "GaborField", "GaborReport", "detect_gabor",
    "GestaltCandidate", "exclusion_filter", "masking_filter",
    "binom_tail", "is_meaningful", "log10_binom_tail", "nfa_from",
    "StimulusSpec", "StimulusRecord", "gen_dot_scene", "gen_negative",
    "gen_positive",
]

__version__ = "0.1.0"
