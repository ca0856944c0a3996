/** Session state for the personalization loop.
 *
 * Slider values are clamped to their declared ranges before any request, and
 * switching modes resets only the mode-specific payload: the uploaded
 * low-light image always survives.
 */
import { EnhanceResponse, Mode, SLIDER_RANGES, Sliders } from "./types.js";

export interface RefSelections {
  refs: Blob[];
  brightRef: Blob | null;
  chromaRef: Blob | null;
  noiseRef: Blob | null;
}

export interface SessionState {
  lowImage: Blob | null;
  mode: Mode;
  refSelections: RefSelections;
  sliders: Sliders;
  debugPanels: boolean;
  lastResponse: EnhanceResponse | null;
  lastError: string | null;
}

export function initialState(): SessionState {
  return {
    lowImage: null,
    mode: "references",
    refSelections: { refs: [], brightRef: null, chromaRef: null, noiseRef: null },
    sliders: { gamma: 1.0, c_h: 1.0, c_s: 1.0, c_n: 0.5 },
    debugPanels: false,
    lastResponse: null,
    lastError: null,
  };
}

export function clampSlider(name: keyof Sliders, value: number): number {
  const [lo, hi] = SLIDER_RANGES[name];
  if (Number.isNaN(value)) return lo;
  return Math.min(hi, Math.max(lo, value));
}

export function setSlider(
  state: SessionState,
  name: keyof Sliders,
  value: number,
): SessionState {
  return {
    ...state,
    sliders: { ...state.sliders, [name]: clampSlider(name, value) },
  };
}

export function setLowImage(state: SessionState, image: Blob): SessionState {
  return { ...state, lowImage: image };
}

/** Mode switch wipes the other modes' payload but never the low image. */
export function setMode(state: SessionState, mode: Mode): SessionState {
  if (mode === state.mode) return state;
  return {
    ...state,
    mode,
    refSelections: { refs: [], brightRef: null, chromaRef: null, noiseRef: null },
  };
}

export function setRefs(state: SessionState, refs: Blob[]): SessionState {
  return { ...state, refSelections: { ...state.refSelections, refs } };
}

export function setAttributeRef(
  state: SessionState,
  which: "brightRef" | "chromaRef" | "noiseRef",
  image: Blob,
): SessionState {
  return {
    ...state,
    refSelections: { ...state.refSelections, [which]: image },
  };
}

/** Why a request cannot be sent yet, or null when it can. */
export function submitBlocker(state: SessionState): string | null {
  if (!state.lowImage) return "Upload a low-light image first.";
  if (state.mode === "references" && state.refSelections.refs.length === 0) {
    return "Pick at least one reference image.";
  }
  if (state.mode === "cross_attribution") {
    const { brightRef, chromaRef, noiseRef } = state.refSelections;
    if (!brightRef || !chromaRef || !noiseRef) {
      return "Pick brightness, chromaticity and noise references.";
    }
  }
  return null;
}
