/**
 * Candidate realization, training, evaluation, and serialized-size measurement.
 *
 * The architecture mirrors the engine's realization rules: stride-1
 * same-padding conv stack in gene order, flatten, dense(10) relu, dense(2)
 * softmax, trained with Adam on categorical cross entropy. Model size is the
 * byte count of the serialized deployment artifacts (topology/manifest JSON
 * plus the weight binary).
 */

import * as tf from "@tensorflow/tfjs";

import { computeFeatures, featureRows, frameCount, prepareWindow, resamplePow2, Matrix } from "./features";
import { ClipRecord, Dataset, loadDataset } from "./dataset";
import { EvaluateRequest, ResultResponse, WireDsp, WireGenome } from "./protocol";

const DENSE_WIDTH = 10;
const N_CLASSES = 2;

export interface Metrics {
  accuracy: number;
  precision: number;
  recall: number;
  modelSizeBytes: number;
}

export function buildModel(genome: WireGenome, rows: number, cols: number, seed: number): tf.Sequential {
  // explicit layer/model names keep the serialized topology (and therefore the
  // measured byte size) identical across evaluations within one process
  const model = tf.sequential({ name: "candidate" });
  genome.layers.forEach((layer, i) => {
    model.add(
      tf.layers.conv2d({
        name: `conv_${i}`,
        inputShape: i === 0 ? [rows, cols, 1] : undefined,
        filters: layer.filters,
        kernelSize: layer.kernel_size,
        strides: 1,
        padding: "same",
        activation: layer.activation === "RELU" ? "relu" : "sigmoid",
        kernelInitializer: tf.initializers.glorotUniform({ seed: seed + i }),
      })
    );
  });
  model.add(tf.layers.flatten({ name: "flatten" }));
  model.add(
    tf.layers.dense({
      name: "hidden",
      units: DENSE_WIDTH,
      activation: "relu",
      kernelInitializer: tf.initializers.glorotUniform({ seed: seed + 1000 }),
    })
  );
  model.add(
    tf.layers.dense({
      name: "output",
      units: N_CLASSES,
      activation: "softmax",
      kernelInitializer: tf.initializers.glorotUniform({ seed: seed + 2000 }),
    })
  );
  model.compile({ optimizer: tf.train.adam(), loss: "categoricalCrossentropy" });
  return model;
}

/** Serialized size: weight binary plus the topology/weights-manifest JSON. */
export async function measureModelSizeBytes(model: tf.LayersModel): Promise<number> {
  let size = 0;
  await model.save(
    tf.io.withSaveHandler(async (artifacts) => {
      const weightBytes =
        artifacts.weightData instanceof ArrayBuffer
          ? artifacts.weightData.byteLength
          : (artifacts.weightData ?? []).reduce((acc, buf) => acc + buf.byteLength, 0);
      const manifest = {
        modelTopology: artifacts.modelTopology,
        weightsManifest: [{ paths: ["model.weights.bin"], weights: artifacts.weightSpecs }],
      };
      size = weightBytes + Buffer.byteLength(JSON.stringify(manifest), "utf-8");
      return { modelArtifactsInfo: { dateSaved: new Date(), modelTopologyType: "JSON" } };
    })
  );
  return size;
}

function clipToFeatures(clip: ClipRecord, genome: WireGenome, dsp: WireDsp): Matrix {
  const resampled = resamplePow2(clip.samples, clip.rateHz, genome.sample_rate_hz);
  const windowed = prepareWindow(resampled, genome.sample_rate_hz, dsp.window_s);
  return computeFeatures(windowed, genome.preprocessing, dsp, genome.sample_rate_hz);
}

function toTensors(clips: ClipRecord[], genome: WireGenome, dsp: WireDsp, rows: number, cols: number) {
  const xs = new Float32Array(clips.length * rows * cols);
  const ys = new Float32Array(clips.length * N_CLASSES);
  clips.forEach((clip, n) => {
    const feat = clipToFeatures(clip, genome, dsp);
    for (let r = 0; r < rows; r++) {
      for (let c = 0; c < cols; c++) {
        xs[n * rows * cols + r * cols + c] = feat[r][c];
      }
    }
    ys[n * N_CLASSES + clip.label] = 1;
  });
  return {
    xs: tf.tensor4d(xs, [clips.length, rows, cols, 1]),
    ys: tf.tensor2d(ys, [clips.length, N_CLASSES]),
  };
}

/** Standardize features with train-split statistics; keeps training stable. */
function standardize(train: tf.Tensor4D, test: tf.Tensor4D): [tf.Tensor4D, tf.Tensor4D] {
  return tf.tidy(() => {
    const mean = train.mean();
    const std = tf.sqrt(train.sub(mean).square().mean()).add(1e-6);
    return [train.sub(mean).div(std) as tf.Tensor4D, test.sub(mean).div(std) as tf.Tensor4D];
  });
}

export function confusionMetrics(labels: number[], predicted: number[]): {
  accuracy: number;
  precision: number;
  recall: number;
} {
  let tp = 0;
  let fp = 0;
  let fn = 0;
  let correct = 0;
  labels.forEach((label, i) => {
    const hit = predicted[i] === label;
    if (hit) correct += 1;
    if (predicted[i] === 1 && label === 1) tp += 1;
    if (predicted[i] === 1 && label === 0) fp += 1;
    if (predicted[i] === 0 && label === 1) fn += 1;
  });
  return {
    accuracy: labels.length ? correct / labels.length : 0,
    precision: tp + fp ? tp / (tp + fp) : 0,
    recall: tp + fn ? tp / (tp + fn) : 0,
  };
}

const datasetCache = new Map<string, Dataset>();

export async function trainAndMeasure(request: EvaluateRequest): Promise<Metrics> {
  const { genome, dsp, train } = request;
  let dataset = datasetCache.get(train.dataset_dir);
  if (!dataset) {
    dataset = loadDataset(train.dataset_dir);
    datasetCache.set(train.dataset_dir, dataset);
  }
  if (dataset.train.length === 0) throw new Error("train split is empty under the filename hash");
  if (dataset.test.length === 0) throw new Error("test split is empty under the filename hash");

  const rows = featureRows(genome.preprocessing, dsp);
  const cols = frameCount(Math.round(dsp.window_s * genome.sample_rate_hz), dsp.hop_length);

  const model = buildModel(genome, rows, cols, train.seed);
  const trainData = toTensors(dataset.train, genome, dsp, rows, cols);
  const testData = toTensors(dataset.test, genome, dsp, rows, cols);
  const [trainX, testX] = standardize(trainData.xs, testData.xs);

  try {
    await model.fit(trainX, trainData.ys, {
      epochs: train.epochs,
      batchSize: train.batch_size,
      shuffle: true,
      verbose: 0,
    });
    const probs = model.predict(testX) as tf.Tensor2D;
    const predicted = Array.from(await probs.argMax(-1).data());
    probs.dispose();
    const labels = dataset.test.map((c) => c.label);
    const scores = confusionMetrics(labels, predicted);
    const modelSizeBytes = await measureModelSizeBytes(model);
    return { ...scores, modelSizeBytes };
  } finally {
    trainData.xs.dispose();
    trainData.ys.dispose();
    testData.xs.dispose();
    testData.ys.dispose();
    trainX.dispose();
    testX.dispose();
    model.dispose();
  }
}

export async function handleEvaluate(request: EvaluateRequest): Promise<ResultResponse> {
  const metrics = await trainAndMeasure(request);
  return {
    type: "result",
    id: request.id,
    accuracy: metrics.accuracy,
    precision: metrics.precision,
    recall: metrics.recall,
    model_size_bytes: metrics.modelSizeBytes,
  };
}
