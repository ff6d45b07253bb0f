// Flocking noise-sweep figure from run records: three stacked panels of
// cluster count, mean intragroup distance, and velocity consensus error
// against the tick, one curve per noise level. Levels backed by several runs
// get a 99% confidence band; a single run is drawn without one.

import * as fs from "node:fs";
import * as path from "node:path";

import { SchemaError, parseJsonl, requireKey } from "./table";
import {
  PALETTE,
  Scale,
  el,
  fmt,
  fmtValue,
  linearScale,
  niceTicks,
  svgDocument,
  textEl,
  xAxis,
  yAxis,
} from "./svg";

const Z_99 = 2.5758293035489004; // matches the harness aggregate columns

export interface RunStream {
  dir: string;
  noise: number;
  ticks: number[];
  clusters: number[];
  distance: (number | null)[];
  consensus: number[];
}

/** Directories holding a record.json, depth-first in sorted order. */
export const findRunDirs = (root: string): string[] => {
  if (fs.existsSync(path.join(root, "record.json"))) {
    return [root];
  }
  const found: string[] = [];
  const walk = (dir: string): void => {
    const entries = fs.readdirSync(dir, { withFileTypes: true });
    entries.sort((a, b) => (a.name < b.name ? -1 : a.name > b.name ? 1 : 0));
    for (const entry of entries) {
      if (!entry.isDirectory()) {
        continue;
      }
      const child = path.join(dir, entry.name);
      if (fs.existsSync(path.join(child, "record.json"))) {
        found.push(child);
      } else {
        walk(child);
      }
    }
  };
  walk(root);
  return found;
};

/** Read one run directory into the per-tick series the figure needs. */
export const loadRunStream = (dir: string): RunStream => {
  const recordLabel = path.join(dir, "record.json");
  let record: Record<string, unknown>;
  try {
    record = JSON.parse(fs.readFileSync(recordLabel, "utf-8"));
  } catch {
    throw new SchemaError(`${recordLabel}: not valid JSON`);
  }
  const scenario = requireKey(record, "scenario", recordLabel);
  if (typeof scenario !== "object" || scenario === null) {
    throw new SchemaError(`${recordLabel}: "scenario" is not an object`);
  }
  const noise = requireKey(scenario as Record<string, unknown>, "noise_fraction", recordLabel);
  if (typeof noise !== "number") {
    throw new SchemaError(`${recordLabel}: "noise_fraction" is not a number`);
  }

  const metricsLabel = path.join(dir, "metrics.jsonl");
  const samples = parseJsonl(fs.readFileSync(metricsLabel, "utf-8"), metricsLabel);
  if (samples.length === 0) {
    throw new SchemaError(`${metricsLabel}: no samples`);
  }
  const ticks: number[] = [];
  const clusters: number[] = [];
  const distance: (number | null)[] = [];
  const consensus: number[] = [];
  for (const sample of samples) {
    ticks.push(asNumber(requireKey(sample, "tick", metricsLabel), "tick", metricsLabel));
    clusters.push(
      asNumber(requireKey(sample, "cluster_count", metricsLabel), "cluster_count", metricsLabel),
    );
    const d = requireKey(sample, "mean_intragroup_distance", metricsLabel);
    if (d === null) {
      distance.push(null);
    } else {
      distance.push(asNumber(d, "mean_intragroup_distance", metricsLabel));
    }
    consensus.push(
      asNumber(
        requireKey(sample, "velocity_consensus_error", metricsLabel),
        "velocity_consensus_error",
        metricsLabel,
      ),
    );
  }
  return { dir, noise, ticks, clusters, distance, consensus };
};

const asNumber = (value: unknown, key: string, label: string): number => {
  if (typeof value !== "number" || !Number.isFinite(value)) {
    throw new SchemaError(`${label}: key "${key}" is not a finite number`);
  }
  return value;
};

export interface NoiseSeries {
  noise: number;
  ticks: number[];
  // index 0: clusters, 1: distance, 2: consensus; null where every run is null
  mean: (number | null)[][];
  half: (number | null)[][] | null; // null for single-run levels
}

/** Group runs by noise level and average them on the shared tick grid. */
export const summarizeByNoise = (runs: RunStream[]): NoiseSeries[] => {
  if (runs.length === 0) {
    throw new SchemaError("no run directories found under the input path");
  }
  const levels = [...new Set(runs.map((r) => r.noise))].sort((a, b) => a - b);
  return levels.map((noise) => {
    const group = runs.filter((r) => r.noise === noise);
    const ticks = group[0]!.ticks;
    for (const run of group.slice(1)) {
      if (run.ticks.length !== ticks.length || run.ticks.some((t, i) => t !== ticks[i])) {
        throw new SchemaError(
          `${run.dir}: tick grid differs from ${group[0]!.dir}; runs of one noise level must share a stride`,
        );
      }
    }
    const metric = (run: RunStream, m: number): (number | null)[] =>
      m === 0 ? run.clusters : m === 1 ? run.distance : run.consensus;
    const mean: (number | null)[][] = [];
    const half: (number | null)[][] = [];
    for (let m = 0; m < 3; m++) {
      const meanRow: (number | null)[] = [];
      const halfRow: (number | null)[] = [];
      for (let i = 0; i < ticks.length; i++) {
        const values = group
          .map((run) => metric(run, m)[i]!)
          .filter((v): v is number => v !== null);
        if (values.length === 0) {
          meanRow.push(null);
          halfRow.push(null);
          continue;
        }
        const mu = values.reduce((a, b) => a + b, 0) / values.length;
        meanRow.push(mu);
        if (values.length < 2) {
          halfRow.push(null);
        } else {
          const variance =
            values.reduce((a, b) => a + (b - mu) * (b - mu), 0) / (values.length - 1);
          halfRow.push(Z_99 * Math.sqrt(variance / values.length));
        }
      }
      mean.push(meanRow);
      half.push(halfRow);
    }
    const single = group.length < 2;
    return { noise, ticks, mean, half: single ? null : half };
  });
};

const PANEL_LABELS = ["cluster count", "mean intragroup distance", "velocity consensus error"];

/** Move-to/line-to path over (tick, value) points, broken at null gaps. */
const seriesPath = (ticks: number[], values: (number | null)[], x: Scale, y: Scale): string => {
  let d = "";
  let pen = false;
  for (let i = 0; i < ticks.length; i++) {
    const v = values[i];
    if (v === null || v === undefined) {
      pen = false;
      continue;
    }
    d += `${pen ? "L" : "M"}${fmt(x(ticks[i]!))} ${fmt(y(v))}`;
    pen = true;
  }
  return d;
};

const bandPath = (
  ticks: number[],
  mean: (number | null)[],
  half: (number | null)[],
  x: Scale,
  y: Scale,
): string => {
  const upper: [number, number][] = [];
  const lower: [number, number][] = [];
  for (let i = 0; i < ticks.length; i++) {
    const mu = mean[i];
    const h = half[i];
    if (mu === null || mu === undefined || h === null || h === undefined) {
      continue;
    }
    upper.push([x(ticks[i]!), y(mu + h)]);
    lower.push([x(ticks[i]!), y(mu - h)]);
  }
  if (upper.length === 0) {
    return "";
  }
  const forward = upper.map(([px, py], i) => `${i === 0 ? "M" : "L"}${fmt(px)} ${fmt(py)}`);
  const back = lower.reverse().map(([px, py]) => `L${fmt(px)} ${fmt(py)}`);
  return forward.join("") + back.join("") + "Z";
};

export const buildFlockingFigure = (series: NoiseSeries[]): string => {
  const width = 640;
  const left = 70;
  const right = 20;
  const top = 42;
  const panelHeight = 150;
  const panelGap = 34;
  const bottom = 48;
  const height = top + panelHeight * 3 + panelGap * 2 + bottom;

  const allTicks = series.flatMap((s) => s.ticks);
  const xMax = Math.max(...allTicks);
  const x = linearScale([0, xMax === 0 ? 1 : xMax], [left, width - right]);

  const parts: string[] = [];

  // ---- legend -------------------------------------------------------------
  let legendX = left;
  for (let k = 0; k < series.length; k++) {
    const label = `noise ${fmtValue(series[k]!.noise)}`;
    parts.push(
      el("line", {
        x1: legendX,
        y1: 20,
        x2: legendX + 16,
        y2: 20,
        stroke: PALETTE[k % PALETTE.length]!,
        "stroke-width": 2,
      }),
    );
    parts.push(textEl(legendX + 20, 24, label, { "font-size": 11, fill: "#333333" }));
    legendX += 20 + label.length * 7 + 16;
  }

  // ---- three stacked panels ------------------------------------------------
  for (let m = 0; m < 3; m++) {
    const panelTop = top + m * (panelHeight + panelGap);
    const values: number[] = [];
    for (const s of series) {
      for (let i = 0; i < s.ticks.length; i++) {
        const mu = s.mean[m]![i];
        if (mu === null || mu === undefined) {
          continue;
        }
        const h = s.half === null ? null : s.half[m]![i];
        values.push(mu + (h ?? 0));
        values.push(mu - (h ?? 0));
      }
    }
    const lo = Math.min(0, ...values);
    const hi = Math.max(...values);
    const pad = hi === lo ? Math.max(1, Math.abs(hi)) * 0.1 : (hi - lo) * 0.08;
    const y = linearScale([lo, hi + pad], [panelTop + panelHeight, panelTop]);

    const panelParts: string[] = [];
    panelParts.push(yAxis(y, left, niceTicks(lo, hi + pad, 4), PANEL_LABELS[m]!));
    for (let k = 0; k < series.length; k++) {
      const s = series[k]!;
      if (s.half !== null) {
        const d = bandPath(s.ticks, s.mean[m]!, s.half[m]!, x, y);
        if (d !== "") {
          panelParts.push(
            el("path", {
              class: "band",
              d,
              fill: PALETTE[k % PALETTE.length]!,
              "fill-opacity": "0.18",
              stroke: "none",
            }),
          );
        }
      }
      panelParts.push(
        el("path", {
          class: "curve",
          d: seriesPath(s.ticks, s.mean[m]!, x, y),
          fill: "none",
          stroke: PALETTE[k % PALETTE.length]!,
          "stroke-width": 1.6,
        }),
      );
    }
    const caption = m === 2 ? "tick" : "";
    panelParts.push(xAxis(x, panelTop + panelHeight, niceTicks(0, xMax, 6), caption));
    parts.push(el("g", { class: "panel" }, panelParts));
  }

  return svgDocument(width, height, parts);
};
