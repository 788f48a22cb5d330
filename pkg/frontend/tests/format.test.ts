import { describe, expect, it } from "vitest";
import { barLabels, barWidths, exactProbability } from "../src/format.ts";

describe("exactProbability", () => {
  it("renders wire values verbatim", () => {
    expect(exactProbability(0.825)).toBe("0.825");
    expect(exactProbability(0.9)).toBe("0.9");
    expect(exactProbability(0.818181818182)).toBe("0.818181818182");
    expect(exactProbability(0.5)).toBe("0.5");
    expect(exactProbability(1)).toBe("1");
  });
});

describe("barLabels", () => {
  it("rounds the worked values to two decimals, halves upward", () => {
    expect(barLabels(0.825)).toEqual(["0.83", "0.17"]);
    expect(barLabels(0.9)).toEqual(["0.90", "0.10"]);
    expect(barLabels(0.818181818182)).toEqual(["0.82", "0.18"]);
    expect(barLabels(0.375)).toEqual(["0.38", "0.62"]);
    expect(barLabels(0)).toEqual(["0.00", "1.00"]);
    expect(barLabels(1)).toEqual(["1.00", "0.00"]);
  });

  it("sums to exactly 1.00 for every hundredth and thousandth", () => {
    for (let i = 0; i <= 1000; i += 1) {
      const [first, second] = barLabels(i / 1000);
      const cents = Math.round(Number(first) * 100) + Math.round(Number(second) * 100);
      expect(cents).toBe(100);
    }
  });
});

describe("barWidths", () => {
  it("matches the labels", () => {
    expect(barWidths(0.825)).toEqual(["83%", "17%"]);
    expect(barWidths(0.1)).toEqual(["10%", "90%"]);
    expect(barWidths(0.5)).toEqual(["50%", "50%"]);
  });
});
