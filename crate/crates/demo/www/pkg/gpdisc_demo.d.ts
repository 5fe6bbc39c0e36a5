/* tslint:disable */
/* eslint-disable */

/**
 * Synthetic basic-example data with both optimizer fits.
 */
export class BasicExampleFit {
    free(): void;
    [Symbol.dispose](): void;
    gpTheta(): Float64Array;
    ignoreTheta(): Float64Array;
    locations(k: number): Float64Array;
    /**
     * `g(theta_hat)` of the ignore fit (`gp = false`) or the gp-fixed fit.
     */
    modelPrediction(k: number, gp: boolean): Float64Array;
    constructor(seed: number, n_rich: number, variance_reading: boolean);
    observations(k: number): Float64Array;
    processPrediction(k: number): Float64Array;
    rmsMisfit(k: number, gp: boolean): number;
    /**
     * Indices of the fixed supports of stream `k`.
     */
    supports(k: number): Uint32Array;
    truth(k: number): Float64Array;
}

export function conditionalDraws(x: Float64Array, z: Float64Array, noise: number, grid: Float64Array, psi: number, sigma2_d: number, draws: number, seed: number): Float64Array;

export function selectSupports(locations: Float64Array, psi: number, offset: number): Uint32Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_basicexamplefit_free: (a: number, b: number) => void;
    readonly basicexamplefit_gpTheta: (a: number) => [number, number];
    readonly basicexamplefit_ignoreTheta: (a: number) => [number, number];
    readonly basicexamplefit_locations: (a: number, b: number) => [number, number, number, number];
    readonly basicexamplefit_modelPrediction: (a: number, b: number, c: number) => [number, number, number, number];
    readonly basicexamplefit_new: (a: number, b: number, c: number) => [number, number, number];
    readonly basicexamplefit_observations: (a: number, b: number) => [number, number, number, number];
    readonly basicexamplefit_processPrediction: (a: number, b: number) => [number, number, number, number];
    readonly basicexamplefit_rmsMisfit: (a: number, b: number, c: number) => [number, number, number];
    readonly basicexamplefit_supports: (a: number, b: number) => [number, number];
    readonly basicexamplefit_truth: (a: number, b: number) => [number, number];
    readonly conditionalDraws: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number, j: number, k: number) => [number, number, number, number];
    readonly selectSupports: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
