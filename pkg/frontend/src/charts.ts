// Hand-rolled SVG charts: a donut for sentiment shares and a split bar for
// retweets vs original posts. No chart library: the data is three numbers.

const SVG_NS = "http://www.w3.org/2000/svg";

export interface DonutSegment {
  label: string;
  value: number; // percent 0..100
  color: string;
}

function polar(cx: number, cy: number, r: number, angle: number): [number, number] {
  return [cx + r * Math.cos(angle), cy + r * Math.sin(angle)];
}

export function donutChart(segments: DonutSegment[], size = 160): SVGSVGElement {
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${size} ${size}`);
  svg.setAttribute("width", String(size));
  svg.setAttribute("height", String(size));
  svg.setAttribute("role", "img");

  const cx = size / 2;
  const cy = size / 2;
  const rOuter = size / 2 - 4;
  const rInner = rOuter * 0.62;
  const total = segments.reduce((acc, s) => acc + s.value, 0) || 1;

  let angle = -Math.PI / 2;
  for (const seg of segments) {
    if (seg.value <= 0) continue;
    const sweep = (seg.value / total) * 2 * Math.PI;
    const el = document.createElementNS(SVG_NS, "path");
    el.dataset.label = seg.label;
    el.dataset.value = seg.value.toFixed(1);
    el.setAttribute("fill", seg.color);
    if (sweep >= 2 * Math.PI - 1e-6) {
      // single full-circle segment: two arcs, else the path collapses
      el.setAttribute(
        "d",
        [
          `M ${cx} ${cy - rOuter}`,
          `A ${rOuter} ${rOuter} 0 1 1 ${cx} ${cy + rOuter}`,
          `A ${rOuter} ${rOuter} 0 1 1 ${cx} ${cy - rOuter}`,
          `M ${cx} ${cy - rInner}`,
          `A ${rInner} ${rInner} 0 1 0 ${cx} ${cy + rInner}`,
          `A ${rInner} ${rInner} 0 1 0 ${cx} ${cy - rInner}`,
          "Z",
        ].join(" "),
      );
      el.setAttribute("fill-rule", "evenodd");
    } else {
      const a0 = angle;
      const a1 = angle + sweep;
      const large = sweep > Math.PI ? 1 : 0;
      const [x0, y0] = polar(cx, cy, rOuter, a0);
      const [x1, y1] = polar(cx, cy, rOuter, a1);
      const [x2, y2] = polar(cx, cy, rInner, a1);
      const [x3, y3] = polar(cx, cy, rInner, a0);
      el.setAttribute(
        "d",
        [
          `M ${x0} ${y0}`,
          `A ${rOuter} ${rOuter} 0 ${large} 1 ${x1} ${y1}`,
          `L ${x2} ${y2}`,
          `A ${rInner} ${rInner} 0 ${large} 0 ${x3} ${y3}`,
          "Z",
        ].join(" "),
      );
    }
    svg.appendChild(el);
    angle += sweep;
  }
  return svg;
}

export function splitBar(leftPct: number, leftLabel: string, rightLabel: string,
                         width = 320, height = 28): SVGSVGElement {
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("width", String(width));
  svg.setAttribute("height", String(height));
  svg.setAttribute("role", "img");

  const clamped = Math.max(0, Math.min(100, leftPct));
  const split = (clamped / 100) * width;

  const left = document.createElementNS(SVG_NS, "rect");
  left.dataset.label = leftLabel;
  left.dataset.value = clamped.toFixed(1);
  left.setAttribute("x", "0");
  left.setAttribute("y", "0");
  left.setAttribute("width", String(split));
  left.setAttribute("height", String(height));
  left.setAttribute("fill", "#5b8def");
  svg.appendChild(left);

  const right = document.createElementNS(SVG_NS, "rect");
  right.dataset.label = rightLabel;
  right.dataset.value = (100 - clamped).toFixed(1);
  right.setAttribute("x", String(split));
  right.setAttribute("y", "0");
  right.setAttribute("width", String(width - split));
  right.setAttribute("height", String(height));
  right.setAttribute("fill", "#d7dce5");
  svg.appendChild(right);
  return svg;
}
