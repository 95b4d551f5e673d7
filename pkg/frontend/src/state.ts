// UI state machine for the upload-and-diagnose flow.
//
// Phases: idle -> preview -> submitting -> (result | error), with error
// recoverable by selecting another image. Transitions are pure functions so
// the machine is testable without a DOM; invariants hold by construction:
// `result` is non-null exactly in the result phase, and submission is only
// reachable from preview.

export type Phase = "idle" | "preview" | "submitting" | "result" | "error";

export interface DiagnosisResult {
  predicted_label: string;
  probabilities: Record<string, number>;
  model_id: string;
  elapsed_ms: number;
}

export interface UiState {
  phase: Phase;
  file: File | null;
  result: DiagnosisResult | null;
  errorMessage: string | null;
}

export const initialState: UiState = {
  phase: "idle",
  file: null,
  result: null,
  errorMessage: null,
};

export function canSubmit(state: UiState): boolean {
  return state.phase === "preview";
}

export function selectImage(_state: UiState, file: File): UiState {
  if (!file.type.startsWith("image/")) {
    return {
      phase: "error",
      file: null,
      result: null,
      errorMessage: `"${file.name}" is not an image file`,
    };
  }
  return { phase: "preview", file, result: null, errorMessage: null };
}

export function beginSubmit(state: UiState): UiState {
  if (!canSubmit(state)) {
    throw new Error(`cannot submit from phase "${state.phase}"`);
  }
  return { ...state, phase: "submitting", result: null, errorMessage: null };
}

export function submitSucceeded(state: UiState, result: DiagnosisResult): UiState {
  if (state.phase !== "submitting") {
    throw new Error(`unexpected success in phase "${state.phase}"`);
  }
  return { ...state, phase: "result", result, errorMessage: null };
}

export function submitFailed(state: UiState, message: string): UiState {
  if (state.phase !== "submitting") {
    throw new Error(`unexpected failure in phase "${state.phase}"`);
  }
  return { ...state, phase: "error", result: null, errorMessage: message };
}

/** Confidence bars, highest first. Labels come from the backend untouched. */
export function sortedConfidences(result: DiagnosisResult): Array<[string, number]> {
  return Object.entries(result.probabilities).sort((a, b) => b[1] - a[1]);
}

/** Backend probability rendered as a percentage with one decimal. */
export function formatPercent(probability: number): string {
  return `${(probability * 100).toFixed(1)}%`;
}
