/** DOM wiring for the personalization studio. */
import { ApiError, getHealth, postEnhance } from "./api.js";
import {
  drawOverlay,
  formatDistance,
  prepareOverlay,
} from "./histogram.js";
import { AdjustmentScheduler } from "./scheduler.js";
import {
  SessionState,
  initialState,
  setAttributeRef,
  setLowImage,
  setMode,
  setRefs,
  setSlider,
  submitBlocker,
} from "./state.js";
import { EnhanceResponse, Mode, Sliders } from "./types.js";

const SERVICE_URL =
  new URLSearchParams(location.search).get("service") ?? "http://127.0.0.1:8023";

let state: SessionState = initialState();
const scheduler = new AdjustmentScheduler<EnhanceResponse>();

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

function showBanner(message: string | null): void {
  const banner = $("banner");
  banner.textContent = message ?? "";
  banner.style.display = message ? "block" : "none";
}

function renderImages(response: EnhanceResponse): void {
  ($("result-img") as HTMLImageElement).src =
    `data:image/png;base64,${response.enhanced}`;
  $("correlations").textContent =
    `c_h ${response.correlations.c_h.toFixed(3)}  ` +
    `c_s ${response.correlations.c_s.toFixed(3)}  ` +
    `c_n ${response.correlations.c_n.toFixed(3)}`;
  $("distance").textContent = formatDistance(
    response.metrics.hist_l1_enhanced_vs_ref,
  );

  const canvas = $("hist-canvas") as HTMLCanvasElement;
  const ctx = canvas.getContext("2d");
  if (ctx) {
    try {
      const overlay = prepareOverlay(
        response.correlations.brightness_hist,
        response.result_brightness_hist,
      );
      drawOverlay(ctx, overlay, canvas.width, canvas.height);
      canvas.style.display = "block";
    } catch {
      canvas.style.display = "none";
    }
  }

  const debug = $("debug-panels");
  debug.innerHTML = "";
  if (response.intermediates) {
    const panels: [string, string][] = [
      ["input illumination", response.intermediates.l_low],
      ["enhanced illumination", response.intermediates.l_en],
      ["input reflectance", response.intermediates.r_low],
      ["enhanced reflectance", response.intermediates.r_en],
      ["denoised reflectance", response.intermediates.r_de],
      ["noise before", response.intermediates.n_en.png],
      ["noise after", response.intermediates.n_de.png],
    ];
    for (const [label, png] of panels) {
      const figure = document.createElement("figure");
      const img = document.createElement("img");
      img.src = `data:image/png;base64,${png}`;
      const caption = document.createElement("figcaption");
      caption.textContent = label;
      figure.append(img, caption);
      debug.append(figure);
    }
  }
}

function submit(): void {
  const blocker = submitBlocker(state);
  if (blocker) {
    showBanner(blocker);
    return;
  }
  showBanner(null);
  $("status").textContent = "enhancing...";
  scheduler.request({
    run: () => postEnhance(SERVICE_URL, state),
    onResult: (response) => {
      state = { ...state, lastResponse: response, lastError: null };
      $("status").textContent = "";
      renderImages(response);
    },
    onError: (error) => {
      const message =
        error instanceof ApiError
          ? `service rejected the request: ${error.message}`
          : `request failed: ${String(error)}`;
      state = { ...state, lastError: message };
      $("status").textContent = "";
      showBanner(message); // slider state intentionally untouched
    },
  });
}

function bindSlider(name: keyof Sliders): void {
  const input = $(`slider-${name}`) as HTMLInputElement;
  const label = $(`slider-${name}-value`);
  input.addEventListener("input", () => {
    state = setSlider(state, name, Number(input.value));
    label.textContent = state.sliders[name].toFixed(2);
    if (state.mode === "parameters") submit();
  });
}

function fileToBlob(input: HTMLInputElement): Blob | null {
  return input.files && input.files.length > 0 ? input.files[0] : null;
}

export function start(): void {
  ($("low-input") as HTMLInputElement).addEventListener("change", (ev) => {
    const blob = fileToBlob(ev.target as HTMLInputElement);
    if (blob) {
      state = setLowImage(state, blob);
      ($("input-img") as HTMLImageElement).src = URL.createObjectURL(blob);
      submit();
    }
  });

  ($("refs-input") as HTMLInputElement).addEventListener("change", (ev) => {
    const files = (ev.target as HTMLInputElement).files;
    state = setRefs(state, files ? Array.from(files) : []);
    submit();
  });

  for (const which of ["bright", "chroma", "noise"] as const) {
    ($(`${which}-ref-input`) as HTMLInputElement).addEventListener(
      "change",
      (ev) => {
        const blob = fileToBlob(ev.target as HTMLInputElement);
        if (blob) {
          state = setAttributeRef(state, `${which}Ref`, blob);
          submit();
        }
      },
    );
  }

  for (const mode of ["references", "cross_attribution", "parameters"] as Mode[]) {
    $(`mode-${mode}`).addEventListener("click", () => {
      state = setMode(state, mode);
      document
        .querySelectorAll(".mode-section")
        .forEach((el) => ((el as HTMLElement).style.display = "none"));
      $(`section-${mode}`).style.display = "block";
      if (submitBlocker(state) === null) submit();
    });
  }

  (["gamma", "c_h", "c_s", "c_n"] as (keyof Sliders)[]).forEach(bindSlider);

  ($("debug-toggle") as HTMLInputElement).addEventListener("change", (ev) => {
    state = { ...state, debugPanels: (ev.target as HTMLInputElement).checked };
    if (submitBlocker(state) === null) submit();
  });

  void getHealth(SERVICE_URL).then((ok) => {
    if (!ok) {
      showBanner(
        `service unreachable at ${SERVICE_URL}; start it with: ` +
          "relight serve --checkpoint-dir checkpoints",
      );
    }
  });
}

if (typeof document !== "undefined" && document.getElementById("low-input")) {
  start();
}
