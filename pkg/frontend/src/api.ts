/** HTTP client for the enhancement service (multipart uploads, JSON back). */
import { SessionState } from "./state.js";
import { EnhanceResponse, ServiceError } from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

/** Assemble the multipart body for the current mode. */
export function buildFormData(state: SessionState): FormData {
  if (!state.lowImage) throw new Error("no low image in session");
  const form = new FormData();
  form.append("low", state.lowImage, "low.png");

  const payload: Record<string, unknown> = { mode: state.mode };
  if (state.debugPanels) payload.debug = true;

  if (state.mode === "references") {
    for (const ref of state.refSelections.refs) form.append("ref", ref, "ref.png");
  } else if (state.mode === "cross_attribution") {
    const { brightRef, chromaRef, noiseRef } = state.refSelections;
    if (!brightRef || !chromaRef || !noiseRef) {
      throw new Error("cross-attribution mode needs all three references");
    }
    form.append("bright_ref", brightRef, "bright.png");
    form.append("chroma_ref", chromaRef, "chroma.png");
    form.append("noise_ref", noiseRef, "noise.png");
  } else {
    payload.gamma = state.sliders.gamma;
    payload.c_h = state.sliders.c_h;
    payload.c_s = state.sliders.c_s;
    payload.c_n = state.sliders.c_n;
  }
  form.append("payload", JSON.stringify(payload));
  return form;
}

export async function postEnhance(
  baseUrl: string,
  state: SessionState,
  fetchImpl: typeof fetch = fetch,
): Promise<EnhanceResponse> {
  const response = await fetchImpl(`${baseUrl}/enhance`, {
    method: "POST",
    body: buildFormData(state),
  });
  const body = (await response.json()) as EnhanceResponse | ServiceError;
  if (!response.ok) {
    const message =
      "error" in body ? body.error : `service error ${response.status}`;
    throw new ApiError(response.status, message);
  }
  return body as EnhanceResponse;
}

export async function getHealth(
  baseUrl: string,
  fetchImpl: typeof fetch = fetch,
): Promise<boolean> {
  try {
    const response = await fetchImpl(`${baseUrl}/health`);
    return response.ok;
  } catch {
    return false;
  }
}
