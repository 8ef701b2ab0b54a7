/**
 * Process entry point: read one JSON request from stdin, write one JSON
 * response to stdout, exit 0.
 *
 * The exit code stays 0 even for malformed requests; the caller's protocol
 * layer treats a nonzero exit or non-JSON stdout as a transport failure, so
 * those are reserved for genuinely broken invocations.  All library chatter
 * is rerouted to stderr before the ML stack loads.
 */

import { AdapterRequest, AdapterResponse, canonicalStringify, resolveConfig } from './protocol';

function redirectConsoleToStderr(): void {
  const write = (...args: unknown[]) => {
    process.stderr.write(args.map(a => (typeof a === 'string' ? a : String(a))).join(' ') + '\n');
  };
  console.log = write;
  console.info = write;
  console.warn = write;
}

function readStdin(): Promise<string> {
  return new Promise((resolve, reject) => {
    const chunks: Buffer[] = [];
    process.stdin.on('data', chunk => chunks.push(chunk as Buffer));
    process.stdin.on('end', () => resolve(Buffer.concat(chunks).toString('utf8')));
    process.stdin.on('error', reject);
  });
}

function reply(response: AdapterResponse): void {
  process.stdout.write(JSON.stringify(response) + '\n');
}

async function dispatch(request: AdapterRequest): Promise<AdapterResponse> {
  switch (request.mode) {
    case 'echo':
      resolveConfig(request.config);
      return { status: 'ok', fingerprint: canonicalStringify(request.config ?? {}) };
    case 'train_eval': {
      const { runTrainEval } = await import('./train');
      return runTrainEval(request);
    }
    case 'correct': {
      const { runCorrect } = await import('./train');
      return runCorrect(request);
    }
    default:
      return {
        status: 'error',
        message: `unknown mode ${JSON.stringify((request as { mode?: unknown }).mode)}`,
      };
  }
}

async function main(): Promise<void> {
  redirectConsoleToStderr();
  const text = await readStdin();

  let request: AdapterRequest;
  try {
    request = JSON.parse(text);
  } catch (err) {
    reply({ status: 'error', message: `request is not valid JSON: ${(err as Error).message}` });
    return;
  }
  if (request === null || typeof request !== 'object' || Array.isArray(request)) {
    reply({ status: 'error', message: 'request must be a JSON object' });
    return;
  }
  try {
    reply(await dispatch(request));
  } catch (err) {
    reply({ status: 'error', message: (err as Error).message ?? String(err) });
  }
}

main();
