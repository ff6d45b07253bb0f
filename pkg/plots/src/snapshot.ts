// Trajectory snapshot figure from a run's states.jsonl: up to four frames
// (first, two interior, last) of robot positions colored by type, with a
// short heading segment per robot. Axes are the arena, square aspect.

import * as fs from "node:fs";
import * as path from "node:path";

import { SchemaError, parseJsonl, requireKey } from "./table";
import { PALETTE, el, svgDocument, textEl } from "./svg";

export interface Frame {
  tick: number;
  positions: [number, number][];
  velocities: [number, number][];
  types: number[];
}

const asPairs = (value: unknown, key: string, label: string): [number, number][] => {
  if (!Array.isArray(value)) {
    throw new SchemaError(`${label}: key "${key}" is not an array`);
  }
  return value.map((entry) => {
    if (
      !Array.isArray(entry) ||
      entry.length !== 2 ||
      typeof entry[0] !== "number" ||
      typeof entry[1] !== "number"
    ) {
      throw new SchemaError(`${label}: key "${key}" must hold [x, y] pairs`);
    }
    return [entry[0], entry[1]];
  });
};

export const readStates = (text: string, label: string): Frame[] => {
  const lines = parseJsonl(text, label);
  if (lines.length === 0) {
    throw new SchemaError(`${label}: no state lines`);
  }
  return lines.map((line) => {
    const tick = requireKey(line, "tick", label);
    if (typeof tick !== "number") {
      throw new SchemaError(`${label}: key "tick" is not a number`);
    }
    const positions = asPairs(requireKey(line, "positions", label), "positions", label);
    const velocities = asPairs(requireKey(line, "velocities", label), "velocities", label);
    const types = requireKey(line, "types", label);
    if (!Array.isArray(types) || types.some((t) => typeof t !== "number")) {
      throw new SchemaError(`${label}: key "types" is not a number array`);
    }
    if (velocities.length !== positions.length || types.length !== positions.length) {
      throw new SchemaError(`${label}: positions, velocities, and types disagree on robot count`);
    }
    return { tick, positions, velocities, types: types as number[] };
  });
};

export interface SnapshotInput {
  frames: Frame[];
  arena: [number, number] | null; // width, height when record.json is present
}

/** Accept either a run directory or a bare states.jsonl path. */
export const loadSnapshotInput = (input: string): SnapshotInput => {
  const statesPath = fs.statSync(input).isDirectory()
    ? path.join(input, "states.jsonl")
    : input;
  if (!fs.existsSync(statesPath)) {
    throw new SchemaError(
      `${statesPath}: not found; rerun with --states to record robot positions`,
    );
  }
  const frames = readStates(fs.readFileSync(statesPath, "utf-8"), statesPath);
  const recordPath = path.join(path.dirname(statesPath), "record.json");
  let arena: [number, number] | null = null;
  if (fs.existsSync(recordPath)) {
    const record = JSON.parse(fs.readFileSync(recordPath, "utf-8"));
    const box = record?.scenario?.arena;
    if (typeof box?.width === "number" && typeof box?.height === "number") {
      arena = [box.width, box.height];
    }
  }
  return { frames, arena };
};

/** Evenly spaced frame indices: first, interior, last; all when few. */
export const pickFrames = (count: number, want: number): number[] => {
  if (count <= want) {
    return Array.from({ length: count }, (_, i) => i);
  }
  const picked = new Set<number>();
  for (let k = 0; k < want; k++) {
    picked.add(Math.round((k * (count - 1)) / (want - 1)));
  }
  return [...picked].sort((a, b) => a - b);
};

export const buildSnapshotFigure = (input: SnapshotInput): string => {
  const indices = pickFrames(input.frames.length, 4);
  let [aw, ah] = input.arena ?? [0, 0];
  if (input.arena === null) {
    // no record.json: positions are origin-anchored, so mirroring the low
    // margin past the data (max + min) frames them symmetrically
    const xs = input.frames.flatMap((f) => f.positions.map((p) => p[0]));
    const ys = input.frames.flatMap((f) => f.positions.map((p) => p[1]));
    aw = Math.max(1e-6, Math.max(...xs) + Math.min(...xs));
    ah = Math.max(1e-6, Math.max(...ys) + Math.min(...ys));
  }

  const panelSize = 190;
  const gap = 18;
  const top = 34;
  const bottom = 16;
  const leftPad = 16;
  const width = leftPad + indices.length * (panelSize + gap) - gap + 16;
  const height = top + panelSize + bottom;
  const scale = panelSize / Math.max(aw, ah);

  const parts: string[] = [];
  for (let p = 0; p < indices.length; p++) {
    const frame = input.frames[indices[p]!]!;
    const x0 = leftPad + p * (panelSize + gap);
    const panelParts: string[] = [];
    panelParts.push(
      el("rect", {
        x: x0,
        y: top,
        width: aw * scale,
        height: ah * scale,
        fill: "#fafafa",
        stroke: "#333333",
        "stroke-width": 1,
      }),
    );
    for (let i = 0; i < frame.positions.length; i++) {
      const [px, py] = frame.positions[i]!;
      const [vx, vy] = frame.velocities[i]!;
      const cx = x0 + px * scale;
      const cy = top + (ah - py) * scale; // y up in the arena, down in SVG
      const speed = Math.hypot(vx, vy);
      if (speed > 1e-12) {
        // fixed-length heading segment so direction stays readable
        const hx = (vx / speed) * 9;
        const hy = (vy / speed) * 9;
        panelParts.push(
          el("line", {
            class: "heading",
            x1: cx,
            y1: cy,
            x2: cx + hx,
            y2: cy - hy,
            stroke: "#333333",
            "stroke-width": 1,
          }),
        );
      }
      panelParts.push(
        el("circle", {
          class: "robot",
          cx,
          cy,
          r: 3.4,
          fill: PALETTE[frame.types[i]! % PALETTE.length]!,
          stroke: "#333333",
          "stroke-width": 0.6,
        }),
      );
    }
    panelParts.push(
      textEl(x0 + (aw * scale) / 2, top - 8, `tick ${frame.tick}`, {
        "font-size": 11,
        "text-anchor": "middle",
        fill: "#333333",
      }),
    );
    parts.push(el("g", { class: "frame" }, panelParts));
  }

  return svgDocument(Math.round(width), Math.round(height), parts);
};
