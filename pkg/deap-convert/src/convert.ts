/**
 * Subject archive (.dat) to EEGB v1 conversion.
 *
 * The archive must hold "data" [40][40][8064] and "labels" [40][4].
 * Only the first 32 channels (the EEG electrodes, Geneva order) are
 * kept; values are cast to binary32.
 */

import * as fs from 'fs';
import * as path from 'path';

import { encodeEegb } from './eegb';
import { GENEVA_ORDER, N_EEG_CHANNELS } from './montage';
import { loadArrayArchive, NdArray } from './pickle';

export const DEAP_TRIALS = 40;
export const DEAP_CHANNELS = 40;
export const DEAP_SAMPLES = 8064;
export const DEAP_RATE_HZ = 128;

export class ConvertError extends Error {}

function shapeEquals(arr: NdArray, expected: number[]): boolean {
  return (
    arr.shape.length === expected.length &&
    arr.shape.every((d, i) => d === expected[i])
  );
}

export function convertArchive(archive: Uint8Array, subjectId: number): Buffer {
  let arrays: Map<string, NdArray>;
  try {
    arrays = loadArrayArchive(archive);
  } catch (err) {
    throw new ConvertError(`cannot parse subject archive: ${(err as Error).message}`);
  }

  const data = arrays.get('data');
  const labels = arrays.get('labels');
  if (!data || !labels || arrays.size !== 2) {
    throw new ConvertError(
      `archive must hold exactly "data" and "labels", got [${[...arrays.keys()].join(', ')}]`,
    );
  }
  if (!shapeEquals(data, [DEAP_TRIALS, DEAP_CHANNELS, DEAP_SAMPLES])) {
    throw new ConvertError(
      `"data" has shape [${data.shape.join(', ')}], expected ` +
        `[${DEAP_TRIALS}, ${DEAP_CHANNELS}, ${DEAP_SAMPLES}]`,
    );
  }
  if (!shapeEquals(labels, [DEAP_TRIALS, 4])) {
    throw new ConvertError(
      `"labels" has shape [${labels.shape.join(', ')}], expected [${DEAP_TRIALS}, 4]`,
    );
  }

  // drop the 8 peripheral channels; cast to f32
  const samples = new Float32Array(DEAP_TRIALS * N_EEG_CHANNELS * DEAP_SAMPLES);
  let out = 0;
  for (let trial = 0; trial < DEAP_TRIALS; trial++) {
    const trialBase = trial * DEAP_CHANNELS * DEAP_SAMPLES;
    for (let ch = 0; ch < N_EEG_CHANNELS; ch++) {
      const base = trialBase + ch * DEAP_SAMPLES;
      for (let s = 0; s < DEAP_SAMPLES; s++) {
        samples[out++] = data.data[base + s];
      }
    }
  }

  const ratings: number[][] = [];
  for (let trial = 0; trial < DEAP_TRIALS; trial++) {
    ratings.push([
      labels.data[trial * 4],
      labels.data[trial * 4 + 1],
      labels.data[trial * 4 + 2],
      labels.data[trial * 4 + 3],
    ]);
  }

  return encodeEegb({
    subjectId,
    sampleRateHz: DEAP_RATE_HZ,
    channelNames: [...GENEVA_ORDER],
    labels: ratings,
    nTrials: DEAP_TRIALS,
    nChannels: N_EEG_CHANNELS,
    nSamples: DEAP_SAMPLES,
    samples,
  });
}

/** sNN.dat style names carry the subject number. */
export function inferSubjectId(filePath: string): number | null {
  const m = /s(\d+)\./i.exec(path.basename(filePath));
  if (!m) return null;
  const n = parseInt(m[1], 10);
  return n >= 1 ? n : null;
}

export function convertFile(inPath: string, outPath: string, subjectId?: number): void {
  let raw: Buffer;
  try {
    raw = fs.readFileSync(inPath);
  } catch (err) {
    throw new ConvertError(`cannot read ${inPath}: ${(err as Error).message}`);
  }
  const id = subjectId ?? inferSubjectId(inPath) ?? 1;
  const encoded = convertArchive(raw, id);
  fs.writeFileSync(outPath, encoded);
}
