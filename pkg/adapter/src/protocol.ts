/**
 * The one-shot JSON protocol spoken over stdin/stdout.
 *
 * The caller pipes a single JSON request to stdin and reads back a single
 * JSON response on stdout; everything else the process wants to say goes to
 * stderr.  A malformed or out-of-domain request produces a status:"error"
 * response and a zero exit code, never a crash: nonzero exits are reserved
 * for transport-level failure, which the caller treats as a protocol breach.
 */

export type LayerType = 'gru-like' | 'lstm-like';

export interface AdapterConfig {
  layer_type: LayerType;
  depth: number;
  units: number;
  dropout: number;
  bidirectional: boolean;
  batch_size: number;
  epoch_count: number;
  /** Training lines drawn per epoch; null means the whole corpus. */
  samples_per_epoch: number | null;
  seed: number;
  max_line_length: number;
}

export const CONFIG_DEFAULTS: AdapterConfig = {
  layer_type: 'gru-like',
  depth: 1,
  units: 32,
  dropout: 0.0,
  bidirectional: false,
  batch_size: 32,
  epoch_count: 8,
  samples_per_epoch: null,
  seed: 42,
  max_line_length: 24,
};

export type Mode = 'echo' | 'train_eval' | 'correct';

export interface AdapterRequest {
  mode: Mode;
  config?: Partial<AdapterConfig>;
  train_path?: string;
  valid_path?: string;
  model_path?: string;
  input_path?: string;
  output_path?: string;
}

export interface AdapterResponse {
  status: 'ok' | 'error';
  validation_accuracy?: number;
  /** Same value as validation_accuracy; the field name the optimizer reads. */
  score?: number;
  fingerprint?: string;
  message?: string;
}

export class ConfigError extends Error {}

/**
 * Serialize with sorted keys and no whitespace so fingerprints computed here
 * agree byte-for-byte with the optimizer's canonical form.
 */
export function canonicalStringify(value: unknown): string {
  if (Array.isArray(value)) {
    return `[${value.map(canonicalStringify).join(',')}]`;
  }
  if (value !== null && typeof value === 'object') {
    const obj = value as Record<string, unknown>;
    const body = Object.keys(obj)
      .sort()
      .map(key => `${JSON.stringify(key)}:${canonicalStringify(obj[key])}`)
      .join(',');
    return `{${body}}`;
  }
  return JSON.stringify(value) ?? 'null';
}

function isInt(value: unknown): value is number {
  return typeof value === 'number' && Number.isInteger(value);
}

/**
 * Merge a request's partial config over the defaults and validate every
 * field, naming the offending field in the error message.
 *
 * Two spellings from the optimizer's file formats are accepted:
 * bidirectional as the strings "yes"/"no" (INI files have no booleans) and
 * epoch_size as an alias for samples_per_epoch.
 */
export function resolveConfig(raw: unknown): AdapterConfig {
  if (raw === undefined || raw === null) {
    return { ...CONFIG_DEFAULTS };
  }
  if (typeof raw !== 'object' || Array.isArray(raw)) {
    throw new ConfigError('config must be a JSON object');
  }
  const given = { ...(raw as Record<string, unknown>) };
  if ('epoch_size' in given && !('samples_per_epoch' in given)) {
    given.samples_per_epoch = given.epoch_size;
    delete given.epoch_size;
  }
  if (given.bidirectional === 'yes') given.bidirectional = true;
  if (given.bidirectional === 'no') given.bidirectional = false;

  for (const key of Object.keys(given)) {
    if (!(key in CONFIG_DEFAULTS)) {
      throw new ConfigError(`config.${key} is not a recognized field`);
    }
  }
  const config = { ...CONFIG_DEFAULTS, ...given } as AdapterConfig;

  if (config.layer_type !== 'gru-like' && config.layer_type !== 'lstm-like') {
    throw new ConfigError(
      `config.layer_type must be "gru-like" or "lstm-like", got ${JSON.stringify(config.layer_type)}`
    );
  }
  if (!isInt(config.depth) || config.depth < 1 || config.depth > 2) {
    throw new ConfigError(`config.depth must be 1 or 2, got ${JSON.stringify(config.depth)}`);
  }
  if (!isInt(config.units) || config.units < 1 || config.units > 128) {
    throw new ConfigError(
      `config.units must be an integer in [1, 128] at this scale, got ${JSON.stringify(config.units)}`
    );
  }
  if (typeof config.dropout !== 'number' || !(config.dropout >= 0 && config.dropout <= 0.5)) {
    throw new ConfigError(`config.dropout must lie in [0, 0.5], got ${JSON.stringify(config.dropout)}`);
  }
  if (typeof config.bidirectional !== 'boolean') {
    throw new ConfigError(
      `config.bidirectional must be a boolean, got ${JSON.stringify(config.bidirectional)}`
    );
  }
  if (!isInt(config.batch_size) || config.batch_size < 1) {
    throw new ConfigError(
      `config.batch_size must be a positive integer, got ${JSON.stringify(config.batch_size)}`
    );
  }
  if (!isInt(config.epoch_count) || config.epoch_count < 1) {
    throw new ConfigError(
      `config.epoch_count must be a positive integer, got ${JSON.stringify(config.epoch_count)}`
    );
  }
  if (config.samples_per_epoch !== null
      && (!isInt(config.samples_per_epoch) || config.samples_per_epoch < 1)) {
    throw new ConfigError(
      `config.samples_per_epoch must be null or a positive integer, got ${JSON.stringify(config.samples_per_epoch)}`
    );
  }
  if (!isInt(config.seed)) {
    throw new ConfigError(`config.seed must be an integer, got ${JSON.stringify(config.seed)}`);
  }
  if (!isInt(config.max_line_length) || config.max_line_length < 1) {
    throw new ConfigError(
      `config.max_line_length must be a positive integer, got ${JSON.stringify(config.max_line_length)}`
    );
  }
  return config;
}
