import { describe, expect, it } from "vitest";

import { nfaColor, nfaRange } from "../src/color.js";

describe("nfaColor", () => {
  it("maps the most significant score to red", () => {
    expect(nfaColor(-8, -8, -1)).toBe("rgb(255, 26, 0)");
  });

  it("maps the least significant score to blue", () => {
    expect(nfaColor(-1, -8, -1)).toBe("rgb(0, 26, 255)");
  });

  it("interpolates in between", () => {
    expect(nfaColor(-4.5, -8, -1)).toBe("rgb(128, 26, 128)");
  });

  it("renders a single detection red", () => {
    expect(nfaColor(-3, -3, -3)).toBe("rgb(255, 26, 0)");
  });

  it("clamps out-of-range scores", () => {
    expect(nfaColor(-100, -8, -1)).toBe("rgb(255, 26, 0)");
    expect(nfaColor(5, -8, -1)).toBe("rgb(0, 26, 255)");
  });
});

describe("nfaRange", () => {
  it("returns min and max", () => {
    expect(nfaRange([-3, -7, -1])).toEqual([-7, -1]);
  });

  it("handles an empty batch", () => {
    expect(nfaRange([])).toEqual([0, 0]);
  });
});
