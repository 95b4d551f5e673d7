import { describe, expect, it } from "vitest";

import {
  beginSubmit,
  canSubmit,
  formatPercent,
  initialState,
  selectImage,
  sortedConfidences,
  submitFailed,
  submitSucceeded,
  type DiagnosisResult,
  type UiState,
} from "../src/state";

const RESULT: DiagnosisResult = {
  predicted_label: "Pro-B",
  probabilities: { Benign: 0.05, "Early Pre-B": 0.1, "Pre-B": 0.15, "Pro-B": 0.7 },
  model_id: "abc123",
  elapsed_ms: 42,
};

function imageFile(name = "cell.jpg"): File {
  return new File([new Uint8Array([1, 2, 3])], name, { type: "image/jpeg" });
}

describe("selectImage", () => {
  it("moves to preview and enables submit for an image file", () => {
    const state = selectImage(initialState, imageFile());
    expect(state.phase).toBe("preview");
    expect(canSubmit(state)).toBe(true);
    expect(state.file?.name).toBe("cell.jpg");
  });

  it("rejects non-image files with an inline error", () => {
    const pdf = new File([new Uint8Array(4)], "report.pdf", { type: "application/pdf" });
    const state = selectImage(initialState, pdf);
    expect(state.phase).toBe("error");
    expect(state.errorMessage).toContain("report.pdf");
    expect(canSubmit(state)).toBe(false);
  });

  it("reselecting after an error clears it", () => {
    const pdf = new File([new Uint8Array(4)], "report.pdf", { type: "application/pdf" });
    const errored = selectImage(initialState, pdf);
    const recovered = selectImage(errored, imageFile());
    expect(recovered.phase).toBe("preview");
    expect(recovered.errorMessage).toBeNull();
  });
});

describe("submission transitions", () => {
  const preview = selectImage(initialState, imageFile());

  it("submit is disabled except from preview", () => {
    const phases: UiState[] = [
      initialState,
      beginSubmit(preview),
      submitSucceeded(beginSubmit(preview), RESULT),
      submitFailed(beginSubmit(preview), "boom"),
    ];
    for (const state of phases) {
      expect(canSubmit(state)).toBe(false);
      expect(() => beginSubmit(state)).toThrow();
    }
  });

  it("submitting resolves only to result or error", () => {
    const submitting = beginSubmit(preview);
    expect(submitSucceeded(submitting, RESULT).phase).toBe("result");
    expect(submitFailed(submitting, "no model loaded").phase).toBe("error");
    // out-of-phase resolutions are rejected
    expect(() => submitSucceeded(preview, RESULT)).toThrow();
    expect(() => submitFailed(initialState, "x")).toThrow();
  });

  it("result is present exactly in the result phase", () => {
    const submitting = beginSubmit(preview);
    expect(submitting.result).toBeNull();
    expect(submitSucceeded(submitting, RESULT).result).toEqual(RESULT);
    expect(submitFailed(submitting, "x").result).toBeNull();
  });
});

describe("confidence rendering helpers", () => {
  it("sorts descending without renaming labels", () => {
    const rows = sortedConfidences(RESULT);
    expect(rows.map(([label]) => label)).toEqual(["Pro-B", "Pre-B", "Early Pre-B", "Benign"]);
    expect(rows.map(([, p]) => p)).toEqual([0.7, 0.15, 0.1, 0.05]);
  });

  it("formats probabilities as one-decimal percentages", () => {
    expect(formatPercent(0.7)).toBe("70.0%");
    expect(formatPercent(0.97421)).toBe("97.4%");
    expect(formatPercent(0)).toBe("0.0%");
  });
});
