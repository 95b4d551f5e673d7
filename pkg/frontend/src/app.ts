// DOM wiring: renders the current UiState and drives transitions from user
// events. One in-flight request at most; the submit button is disabled
// outside the preview phase, so double submission is structurally impossible.

import { ApiError, diagnose } from "./api";
import {
  UiState,
  beginSubmit,
  canSubmit,
  formatPercent,
  initialState,
  selectImage,
  sortedConfidences,
  submitFailed,
  submitSucceeded,
} from "./state";

export function mountApp(root: HTMLElement): { getState: () => UiState } {
  root.innerHTML = `
    <main class="app">
      <h1>Blood-smear subtype diagnosis</h1>
      <p class="hint">Upload a peripheral blood smear image to classify it as
        Benign, Early Pre-B, Pre-B, or Pro-B.</p>
      <div class="dropzone" id="dropzone">
        <p>Drag an image here, or</p>
        <label class="picker">
          choose a file
          <input type="file" id="file-input" accept="image/*" hidden>
        </label>
      </div>
      <div id="preview" class="preview" hidden>
        <img id="preview-image" alt="selected blood smear preview">
        <span id="file-name"></span>
      </div>
      <button id="submit" disabled>Diagnose</button>
      <div id="status" class="status" hidden></div>
      <section id="result" class="result" hidden>
        <h2>Predicted subtype</h2>
        <div id="predicted" class="predicted"></div>
        <div id="bars" class="bars"></div>
        <div id="model-info" class="model-info"></div>
      </section>
    </main>
  `;

  const fileInput = root.querySelector<HTMLInputElement>("#file-input")!;
  const dropzone = root.querySelector<HTMLElement>("#dropzone")!;
  const submitButton = root.querySelector<HTMLButtonElement>("#submit")!;

  let state: UiState = initialState;

  function setState(next: UiState): void {
    state = next;
    render();
  }

  function render(): void {
    const preview = root.querySelector<HTMLElement>("#preview")!;
    const previewImage = root.querySelector<HTMLImageElement>("#preview-image")!;
    const fileName = root.querySelector<HTMLElement>("#file-name")!;
    const status = root.querySelector<HTMLElement>("#status")!;
    const resultCard = root.querySelector<HTMLElement>("#result")!;

    submitButton.disabled = !canSubmit(state);
    submitButton.textContent = state.phase === "submitting" ? "Diagnosing…" : "Diagnose";

    if (state.file) {
      preview.hidden = false;
      fileName.textContent = state.file.name;
      try {
        previewImage.src = URL.createObjectURL(state.file);
      } catch {
        previewImage.removeAttribute("src"); // object URLs unavailable (tests)
      }
    } else {
      preview.hidden = true;
      previewImage.removeAttribute("src");
    }

    if (state.phase === "error") {
      status.hidden = false;
      status.textContent = state.errorMessage ?? "something went wrong";
      status.className = "status error";
    } else if (state.phase === "submitting") {
      status.hidden = false;
      status.textContent = "Contacting the diagnosis service…";
      status.className = "status busy";
    } else {
      status.hidden = true;
      status.textContent = "";
    }

    if (state.phase === "result" && state.result) {
      resultCard.hidden = false;
      root.querySelector<HTMLElement>("#predicted")!.textContent = state.result.predicted_label;
      const bars = root.querySelector<HTMLElement>("#bars")!;
      bars.innerHTML = "";
      for (const [label, probability] of sortedConfidences(state.result)) {
        const row = document.createElement("div");
        row.className = "bar-row";
        row.innerHTML = `
          <span class="bar-label"></span>
          <span class="bar-track"><span class="bar-fill"></span></span>
          <span class="bar-value"></span>
        `;
        row.querySelector<HTMLElement>(".bar-label")!.textContent = label;
        row.querySelector<HTMLElement>(".bar-fill")!.style.width = `${probability * 100}%`;
        row.querySelector<HTMLElement>(".bar-value")!.textContent = formatPercent(probability);
        bars.appendChild(row);
      }
      root.querySelector<HTMLElement>("#model-info")!.textContent =
        `model ${state.result.model_id} · ${state.result.elapsed_ms} ms`;
    } else {
      resultCard.hidden = true;
    }
  }

  function handleFile(file: File | undefined): void {
    if (!file) return;
    if (state.phase === "submitting") return; // block until the request resolves
    setState(selectImage(state, file));
  }

  fileInput.addEventListener("change", () => handleFile(fileInput.files?.[0]));

  for (const eventName of ["dragenter", "dragover", "dragleave", "drop"]) {
    dropzone.addEventListener(eventName, (event) => {
      event.preventDefault();
      event.stopPropagation();
    });
  }
  dropzone.addEventListener("dragover", () => dropzone.classList.add("active"));
  dropzone.addEventListener("dragleave", () => dropzone.classList.remove("active"));
  dropzone.addEventListener("drop", (event) => {
    dropzone.classList.remove("active");
    handleFile((event as DragEvent).dataTransfer?.files?.[0]);
  });

  submitButton.addEventListener("click", async () => {
    if (!canSubmit(state) || !state.file) return;
    const file = state.file;
    setState(beginSubmit(state));
    try {
      const result = await diagnose(file);
      setState(submitSucceeded(state, result));
    } catch (err) {
      const message = err instanceof ApiError ? err.message : "unexpected error";
      setState(submitFailed(state, message));
    }
  });

  render();
  return { getState: () => state };
}
