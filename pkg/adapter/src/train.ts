/**
 * The two working modes behind the protocol: train_eval and correct.
 *
 * train_eval fits the network on a parallel corpus and reports sequence
 * validation accuracy: the fraction of validation lines whose greedy
 * decoding equals the gold line exactly.  correct loads a saved model and
 * rewrites an input file line by line, order preserved.
 */

import * as fs from 'fs';

import {
  CharTable,
  loadParallelTsv,
  mulberry32,
  readLines,
  shuffledIndices,
  truncateLines,
} from './data';
import {
  annealOptimizer,
  buildModel,
  decodeGreedy,
  initBackend,
  loadModel,
  rowsToOneHot,
  saveModel,
} from './model';
import { AdapterRequest, AdapterResponse, resolveConfig } from './protocol';

function need(value: string | undefined, field: string): string {
  if (!value) throw new Error(`${field} is required for this mode`);
  return value;
}

export async function runTrainEval(request: AdapterRequest): Promise<AdapterResponse> {
  const config = resolveConfig(request.config);
  const trainPath = need(request.train_path, 'train_path');
  const validPath = need(request.valid_path, 'valid_path');
  await initBackend();

  const train = loadParallelTsv(trainPath);
  const valid = loadParallelTsv(validPath);
  if (train.noisy.length === 0) {
    return { status: 'error', message: `training corpus ${trainPath} is empty` };
  }
  if (valid.noisy.length === 0) {
    return { status: 'error', message: `validation corpus ${validPath} is empty` };
  }

  const maxLen = config.max_line_length;
  const width = maxLen + 1; // room for the EOS (source) or BOS (target) slot
  const trainNoisy = truncateLines(train.noisy, maxLen, 'train noisy');
  const trainGold = truncateLines(train.gold, maxLen, 'train gold');
  const validNoisy = truncateLines(valid.noisy, maxLen, 'valid noisy');
  const validGold = truncateLines(valid.gold, maxLen, 'valid gold');

  const table = CharTable.fromLines([...trainNoisy, ...trainGold]);
  const encRows = trainNoisy.map(line => table.encodeSource(line, width));
  const decRows = trainGold.map(line => table.encodeTargetIn(line, width));
  const tgtRows = trainGold.map(line => table.encodeTargetOut(line, width));

  const model = buildModel(config, table.size, width);
  const rand = mulberry32(config.seed ^ 0x5eed);
  // "epoch size" in the sample-count sense: an epoch may tile the corpus
  // several times over, or use only part of it
  const perEpoch = config.samples_per_epoch ?? encRows.length;
  const annealAt = Math.floor(config.epoch_count * 0.6);

  try {
    for (let epoch = 0; epoch < config.epoch_count; epoch++) {
      if (epoch === annealAt && epoch > 0) annealOptimizer(model);
      const order: number[] = [];
      while (order.length < perEpoch) {
        order.push(...shuffledIndices(encRows.length, rand));
      }
      order.length = perEpoch;
      const enc = rowsToOneHot(order.map(i => encRows[i]), width, table.size);
      const dec = rowsToOneHot(order.map(i => decRows[i]), width, table.size);
      const tgt = rowsToOneHot(order.map(i => tgtRows[i]), width, table.size);
      const history = await model.fit([enc, dec], tgt, {
        epochs: 1,
        batchSize: config.batch_size,
        shuffle: false,
        verbose: 0,
      });
      const loss = (history.history.loss?.[0] as number) ?? NaN;
      console.error(`epoch ${epoch + 1}/${config.epoch_count} loss ${loss.toFixed(4)}`);
      enc.dispose();
      dec.dispose();
      tgt.dispose();
    }

    const validRows = validNoisy.map(line => table.encodeSource(line, width));
    const decoded = await decodeGreedy(model, table, validRows, width);
    let exact = 0;
    decoded.forEach((line, i) => {
      if (line === validGold[i]) exact += 1;
    });
    const accuracy = exact / decoded.length;

    if (request.model_path) {
      await saveModel(model, table, width, config, request.model_path);
    }
    return { status: 'ok', validation_accuracy: accuracy, score: accuracy };
  } finally {
    model.dispose();
  }
}

export async function runCorrect(request: AdapterRequest): Promise<AdapterResponse> {
  const modelPath = need(request.model_path, 'model_path');
  const inputPath = need(request.input_path, 'input_path');
  const outputPath = need(request.output_path, 'output_path');
  await initBackend();

  const { model, table, width } = await loadModel(modelPath);
  try {
    const lines = fs.existsSync(inputPath)
      ? readLines(inputPath)
      : (() => {
          throw new Error(`input file not found: ${inputPath}`);
        })();
    const maxLen = width - 1;
    const rows = truncateLines(lines, maxLen, 'input').map(line =>
      table.encodeSource(line, width)
    );
    const decoded = await decodeGreedy(model, table, rows, width);
    fs.writeFileSync(outputPath, decoded.map(line => line + '\n').join(''));
    return { status: 'ok', message: `${decoded.length} lines written` };
  } finally {
    model.dispose();
  }
}
