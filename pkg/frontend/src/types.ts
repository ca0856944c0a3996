/** JSON shapes exchanged with the enhancement service. */

export type Mode = "references" | "cross_attribution" | "parameters";

export interface CorrelationSet {
  brightness_hist: number[];
  c_h: number;
  c_s: number;
  c_n: number;
}

export interface ScaledMap {
  png: string;
  max: number;
}

export interface Intermediates {
  l_low: string;
  l_en: string;
  r_low: string;
  r_en: string;
  r_de: string;
  n_en: ScaledMap;
  n_de: ScaledMap;
}

export interface EnhanceMetrics {
  hist_l1_enhanced_vs_ref: number;
  hist_l1_input_vs_ref: number;
}

export interface EnhanceResponse {
  enhanced: string;
  correlations: CorrelationSet;
  result_brightness_hist: number[];
  metrics: EnhanceMetrics;
  intermediates?: Intermediates;
}

export interface ServiceError {
  error: string;
}

export interface Sliders {
  gamma: number;
  c_h: number;
  c_s: number;
  c_n: number;
}

export const SLIDER_RANGES: Record<keyof Sliders, [number, number]> = {
  gamma: [0.5, 4.0],
  c_h: [0, 1],
  c_s: [0, 1],
  c_n: [0, 1],
};
