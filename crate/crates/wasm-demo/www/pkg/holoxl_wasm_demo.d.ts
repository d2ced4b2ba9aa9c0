/* tslint:disable */
/* eslint-disable */

/**
 * JSON form of [`ao_run`].
 */
export function aoRun(set: string, array_length: number, power_dbm: number, bandwidth_mhz: number, seed: number): string;

/**
 * JSON form of [`coupling_curve`].
 */
export function couplingCurve(min_spacing: number, max_spacing: number, points: number): string;

/**
 * JSON form of [`phase_error_map`].
 */
export function phaseErrorMap(array_length: number, carrier_ghz: number, num_ranges: number, num_angles: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly aoRun: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly couplingCurve: (a: number, b: number, c: number) => [number, number, number, number];
    readonly phaseErrorMap: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly __externref_table_alloc: () => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
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
