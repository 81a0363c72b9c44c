/* tslint:disable */
/* eslint-disable */

/**
 * Cutting-plane run on a seeded random pedigree instance.
 */
export function cdm_run(seed: bigint, m: number, n: number, gap: number): string;

/**
 * Foot of the projection of `(z, w)` onto `z² ≤ w·c0` and the separating cut.
 */
export function project_point(z: number, w: number, c0: number): string;

/**
 * Slice `v0 = 1` of the depth-`s` block, traced along `directions` rays.
 */
export function w_block(s: number, folded: boolean, directions: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly cdm_run: (a: bigint, b: number, c: number, d: number) => [number, number];
    readonly project_point: (a: number, b: number, c: number) => [number, number];
    readonly w_block: (a: number, b: number, c: number) => [number, number];
    readonly __externref_table_alloc: () => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
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
