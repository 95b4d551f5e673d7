import type { DiagnosisResult } from "./state";

export class ApiError extends Error {
  status: number;
  retryable: boolean;

  constructor(message: string, status: number, retryable = false) {
    super(message);
    this.status = status;
    this.retryable = retryable;
  }
}

/** POST the image to /api/diagnose and return the parsed result. */
export async function diagnose(file: File, baseUrl = ""): Promise<DiagnosisResult> {
  const form = new FormData();
  form.append("image", file);

  let response: Response;
  try {
    response = await fetch(`${baseUrl}/api/diagnose`, { method: "POST", body: form });
  } catch {
    throw new ApiError("network error — is the diagnosis server running?", 0, true);
  }

  if (!response.ok) {
    let message = `request failed with status ${response.status}`;
    try {
      const body = (await response.json()) as { message?: string };
      if (body.message) message = body.message;
    } catch {
      // non-JSON error body; keep the status message
    }
    throw new ApiError(message, response.status);
  }
  return (await response.json()) as DiagnosisResult;
}
