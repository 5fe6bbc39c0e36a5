/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_basicexamplefit_free: (a: number, b: number) => void;
export const basicexamplefit_gpTheta: (a: number) => [number, number];
export const basicexamplefit_ignoreTheta: (a: number) => [number, number];
export const basicexamplefit_locations: (a: number, b: number) => [number, number, number, number];
export const basicexamplefit_modelPrediction: (a: number, b: number, c: number) => [number, number, number, number];
export const basicexamplefit_new: (a: number, b: number, c: number) => [number, number, number];
export const basicexamplefit_observations: (a: number, b: number) => [number, number, number, number];
export const basicexamplefit_processPrediction: (a: number, b: number) => [number, number, number, number];
export const basicexamplefit_rmsMisfit: (a: number, b: number, c: number) => [number, number, number];
export const basicexamplefit_supports: (a: number, b: number) => [number, number];
export const basicexamplefit_truth: (a: number, b: number) => [number, number];
export const conditionalDraws: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number, j: number, k: number) => [number, number, number, number];
export const selectSupports: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_start: () => void;
