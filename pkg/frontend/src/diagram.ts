// Render a positioned graph as an SVG string. Pure: the same graph
// always yields the same markup.

import type { PositionedGraph, PositionedNode, RoutedEdge } from "./layout";

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function textAt(x: number, y: number, content: string,
                className: string): string {
  return `<text x="${x}" y="${y}" class="${className}" ` +
    `text-anchor="middle" dominant-baseline="central">` +
    `${esc(content)}</text>`;
}

function diamond(node: PositionedNode, symbol: string): string {
  const cx = node.x + node.w / 2;
  const cy = node.y + node.h / 2;
  const points = [
    `${cx},${node.y}`,
    `${node.x + node.w},${cy}`,
    `${cx},${node.y + node.h}`,
    `${node.x},${cy}`,
  ].join(" ");
  return `<polygon points="${points}" class="gateway"/>` +
    textAt(cx, cy, symbol, "gateway-symbol");
}

function renderNode(node: PositionedNode): string {
  const cx = node.x + node.w / 2;
  const cy = node.y + node.h / 2;
  const label = node.label ?? "";
  switch (node.kind) {
    case "task":
      return `<rect x="${node.x}" y="${node.y}" width="${node.w}" ` +
        `height="${node.h}" rx="9" class="task"/>` +
        textAt(cx, cy, label, "task-label");
    case "transition":
      return `<rect x="${node.x}" y="${node.y}" width="${node.w}" ` +
        `height="${node.h}" class="transition"/>` +
        textAt(cx, cy, label, "task-label");
    case "silent-transition":
      return `<rect x="${node.x}" y="${node.y}" width="${node.w}" ` +
        `height="${node.h}" class="silent-transition"/>`;
    case "exclusive-gateway":
      return diamond(node, "×");
    case "parallel-gateway":
      return diamond(node, "+");
    case "start-event":
      return `<circle cx="${cx}" cy="${cy}" r="${node.w / 2}" ` +
        `class="start-event"/>`;
    case "end-event":
      return `<circle cx="${cx}" cy="${cy}" r="${node.w / 2}" ` +
        `class="end-event"/>`;
    case "place":
      return `<circle cx="${cx}" cy="${cy}" r="${node.w / 2}" ` +
        `class="place"/>`;
    default:
      return `<rect x="${node.x}" y="${node.y}" width="${node.w}" ` +
        `height="${node.h}" class="task"/>` +
        textAt(cx, cy, label, "task-label");
  }
}

function renderEdge(edge: RoutedEdge): string {
  const points = edge.points.map((p) => `${p.x},${p.y}`).join(" ");
  const cls = edge.loopback ? "flow loopback" : "flow";
  return `<polyline points="${points}" class="${cls}" ` +
    `fill="none" marker-end="url(#arrow)"/>`;
}

export function renderSvg(graph: PositionedGraph): string {
  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${graph.width}" ` +
    `height="${graph.height}" ` +
    `viewBox="0 0 ${graph.width} ${graph.height}" class="diagram">`);
  parts.push(
    `<defs><marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" ` +
    `markerWidth="7" markerHeight="7" orient="auto-start-reverse">` +
    `<path d="M 0 0 L 10 5 L 0 10 z"/></marker></defs>`);
  for (const edge of graph.edges) parts.push(renderEdge(edge));
  for (const node of graph.nodes) parts.push(renderNode(node));
  parts.push("</svg>");
  return parts.join("\n");
}
