// Hand-rolled SVG assembly. Everything here is a pure function of its
// arguments (fixed palette, fixed fonts, no timestamps), so a figure built
// twice from the same inputs is byte-identical.

export const PALETTE = ["#4c78a8", "#f58518", "#54a24b", "#e45756", "#72b7b2", "#b279a2"];

export const FONT = "Helvetica, Arial, sans-serif";

/** Fixed-precision coordinate formatting; trailing zeros trimmed. */
export const fmt = (x: number): string => {
  const rounded = x.toFixed(2);
  return rounded.includes(".") ? rounded.replace(/\.?0+$/, "") : rounded;
};

/** Short label formatting for tick values and legends. */
export const fmtValue = (x: number): string => {
  if (Number.isInteger(x)) {
    return String(x);
  }
  return String(Number(x.toPrecision(6)));
};

export const escapeText = (text: string): string =>
  text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");

export interface Scale {
  (value: number): number;
  domain: [number, number];
}

export const linearScale = (domain: [number, number], range: [number, number]): Scale => {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 === 0 ? 1 : d1 - d0;
  const scale = ((value: number) => r0 + ((value - d0) / span) * (r1 - r0)) as Scale;
  scale.domain = domain;
  return scale;
};

/** Round tick positions covering [min, max] with a 1-2-5 step. */
export const niceTicks = (min: number, max: number, count: number): number[] => {
  if (min === max) {
    return [min];
  }
  const rawStep = (max - min) / Math.max(1, count);
  const power = Math.floor(Math.log10(rawStep));
  const base = Math.pow(10, power);
  let step = 10 * base;
  for (const mult of [1, 2, 5]) {
    if (mult * base >= rawStep) {
      step = mult * base;
      break;
    }
  }
  const ticks: number[] = [];
  const first = Math.ceil(min / step) * step;
  for (let v = first; v <= max + step * 1e-9; v += step) {
    ticks.push(Math.abs(v) < step * 1e-9 ? 0 : Number(v.toPrecision(12)));
  }
  return ticks;
};

export interface Attrs {
  [key: string]: string | number;
}

const attrText = (attrs: Attrs): string =>
  Object.entries(attrs)
    .map(([key, value]) => ` ${key}="${typeof value === "number" ? fmt(value) : value}"`)
    .join("");

export const el = (name: string, attrs: Attrs, children: string[] = []): string =>
  children.length === 0
    ? `<${name}${attrText(attrs)}/>`
    : `<${name}${attrText(attrs)}>${children.join("")}</${name}>`;

export const textEl = (x: number, y: number, content: string, attrs: Attrs = {}): string =>
  `<text${attrText({ x: fmt(x), y: fmt(y), "font-family": FONT, ...attrs })}>${escapeText(content)}</text>`;

export const svgDocument = (width: number, height: number, children: string[]): string =>
  [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
    el("rect", { x: 0, y: 0, width, height, fill: "#ffffff" }),
    ...children,
    "</svg>",
    "",
  ].join("\n");

/** Left axis: line, ticks, labels, and a rotated caption. */
export const yAxis = (
  scale: Scale,
  x: number,
  ticks: number[],
  caption: string,
): string => {
  const parts: string[] = [];
  const [lo, hi] = [scale(scale.domain[0]), scale(scale.domain[1])];
  parts.push(el("line", { x1: x, y1: lo, x2: x, y2: hi, stroke: "#333333", "stroke-width": 1 }));
  for (const t of ticks) {
    const y = scale(t);
    parts.push(el("line", { x1: x - 4, y1: y, x2: x, y2: y, stroke: "#333333", "stroke-width": 1 }));
    parts.push(
      textEl(x - 7, y + 3.5, fmtValue(t), {
        "font-size": 10,
        "text-anchor": "end",
        fill: "#333333",
      }),
    );
  }
  const midY = (lo + hi) / 2;
  parts.push(
    textEl(x - 38, midY, caption, {
      "font-size": 11,
      "text-anchor": "middle",
      fill: "#333333",
      transform: `rotate(-90 ${fmt(x - 38)} ${fmt(midY)})`,
    }),
  );
  return parts.join("");
};

/** Bottom axis with numeric ticks. */
export const xAxis = (
  scale: Scale,
  y: number,
  ticks: number[],
  caption: string,
): string => {
  const parts: string[] = [];
  const [left, right] = [scale(scale.domain[0]), scale(scale.domain[1])];
  parts.push(el("line", { x1: left, y1: y, x2: right, y2: y, stroke: "#333333", "stroke-width": 1 }));
  for (const t of ticks) {
    const x = scale(t);
    parts.push(el("line", { x1: x, y1: y, x2: x, y2: y + 4, stroke: "#333333", "stroke-width": 1 }));
    parts.push(
      textEl(x, y + 15, fmtValue(t), {
        "font-size": 10,
        "text-anchor": "middle",
        fill: "#333333",
      }),
    );
  }
  if (caption !== "") {
    parts.push(
      textEl((left + right) / 2, y + 30, caption, {
        "font-size": 11,
        "text-anchor": "middle",
        fill: "#333333",
      }),
    );
  }
  return parts.join("");
};
