/**
 * EEGB v1 portable container.
 *
 * Layout: 5-byte ASCII magic "EEGB1"; unsigned 32-bit little-endian
 * header length; UTF-8 JSON header; then the sample payload as
 * little-endian binary32 values in C order [trial][channel][sample].
 */

export const MAGIC = 'EEGB1';

export interface EegbRecording {
  subjectId: number;
  sampleRateHz: number;
  channelNames: string[];
  /** per-trial (valence, arousal, dominance, liking) ratings */
  labels: number[][];
  nTrials: number;
  nChannels: number;
  nSamples: number;
  /** C-order [trial][channel][sample] */
  samples: Float32Array;
}

export class EegbError extends Error {}

/** Stable key order keeps output byte-deterministic. */
function headerJson(rec: EegbRecording): string {
  const header = {
    channel_names: rec.channelNames,
    labels: rec.labels,
    n_channels: rec.nChannels,
    n_samples: rec.nSamples,
    n_trials: rec.nTrials,
    sample_rate_hz: rec.sampleRateHz,
    subject_id: rec.subjectId,
    version: 1,
  };
  return JSON.stringify(header);
}

export function encodeEegb(rec: EegbRecording): Buffer {
  const expected = rec.nTrials * rec.nChannels * rec.nSamples;
  if (rec.samples.length !== expected) {
    throw new EegbError(`payload has ${rec.samples.length} values, expected ${expected}`);
  }
  if (rec.channelNames.length !== rec.nChannels) {
    throw new EegbError('channel name count does not match n_channels');
  }
  const headerBytes = Buffer.from(headerJson(rec), 'utf-8');
  const fixed = Buffer.alloc(9);
  fixed.write(MAGIC, 0, 'ascii');
  fixed.writeUInt32LE(headerBytes.length, 5);

  const payload = Buffer.alloc(rec.samples.length * 4);
  for (let i = 0; i < rec.samples.length; i++) {
    payload.writeFloatLE(rec.samples[i], i * 4);
  }
  return Buffer.concat([fixed, headerBytes, payload]);
}

export function decodeEegb(buf: Buffer): EegbRecording {
  if (buf.length < 9 || buf.toString('ascii', 0, 5) !== MAGIC) {
    throw new EegbError('not an EEGB v1 file');
  }
  const headerLen = buf.readUInt32LE(5);
  const header = JSON.parse(buf.toString('utf-8', 9, 9 + headerLen));
  const nTrials = header.n_trials as number;
  const nChannels = header.n_channels as number;
  const nSamples = header.n_samples as number;

  const payload = buf.subarray(9 + headerLen);
  const expected = nTrials * nChannels * nSamples * 4;
  if (payload.length !== expected) {
    throw new EegbError(`payload is ${payload.length} bytes, expected ${expected}`);
  }
  const samples = new Float32Array(nTrials * nChannels * nSamples);
  for (let i = 0; i < samples.length; i++) {
    samples[i] = payload.readFloatLE(i * 4);
  }
  return {
    subjectId: header.subject_id,
    sampleRateHz: header.sample_rate_hz,
    channelNames: header.channel_names,
    labels: header.labels,
    nTrials,
    nChannels,
    nSamples,
    samples,
  };
}
