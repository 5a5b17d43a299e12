// Layered left-to-right layout for render graphs. Layers come from the
// server's rank hints; within a layer, nodes are ordered by the
// barycenter of their neighbors in adjacent layers. Edges that run
// against the rank direction (loop redo paths) are routed around the
// drawing in horizontal lanes below it.

import type { RenderEdge, RenderGraph, RenderNode } from "./types";

export interface Point {
  x: number;
  y: number;
}

export interface PositionedNode extends RenderNode {
  x: number; // top-left corner
  y: number;
  w: number;
  h: number;
}

export interface RoutedEdge extends RenderEdge {
  points: Point[];
  loopback: boolean;
}

export interface PositionedGraph {
  width: number;
  height: number;
  nodes: PositionedNode[];
  edges: RoutedEdge[];
}

const MARGIN = 28;
const LAYER_GAP = 72;
const NODE_GAP = 30;
const LANE_GAP = 26;
const CHAR_WIDTH = 7.2; // 12px sans-serif estimate

export function nodeSize(node: RenderNode): { w: number; h: number } {
  const label = node.label ?? "";
  switch (node.kind) {
    case "task":
    case "transition":
      return { w: Math.max(96, 28 + label.length * CHAR_WIDTH), h: 46 };
    case "silent-transition":
      return { w: 28, h: 46 };
    case "exclusive-gateway":
    case "parallel-gateway":
      return { w: 44, h: 44 };
    case "start-event":
    case "end-event":
    case "place":
      return { w: 38, h: 38 };
    default:
      return { w: 96, h: 46 };
  }
}

function center(node: PositionedNode): Point {
  return { x: node.x + node.w / 2, y: node.y + node.h / 2 };
}

export function layout(graph: RenderGraph): PositionedGraph {
  if (graph.nodes.length === 0) {
    return { width: 2 * MARGIN, height: 2 * MARGIN, nodes: [], edges: [] };
  }

  // ranks may be sparse; compress them to consecutive layer indices
  const distinctRanks = [...new Set(graph.nodes.map((n) => n.rank))]
    .sort((a, b) => a - b);
  const layerOf = new Map<string, number>();
  for (const node of graph.nodes) {
    layerOf.set(node.id, distinctRanks.indexOf(node.rank));
  }

  const layers: RenderNode[][] = distinctRanks.map(() => []);
  for (const node of graph.nodes) layers[layerOf.get(node.id)!]!.push(node);

  const forward = graph.edges.filter(
    (e) => layerOf.get(e.source)! < layerOf.get(e.target)!);
  const loopbacks = graph.edges.filter(
    (e) => layerOf.get(e.source)! >= layerOf.get(e.target)!);

  orderByBarycenter(layers, forward, layerOf);

  // horizontal placement: each layer is as wide as its widest node
  const sizes = new Map(graph.nodes.map((n) => [n.id, nodeSize(n)]));
  const layerWidths = layers.map((nodes) =>
    Math.max(...nodes.map((n) => sizes.get(n.id)!.w)));
  const layerX: number[] = [];
  let cursor = MARGIN;
  for (const width of layerWidths) {
    layerX.push(cursor);
    cursor += width + LAYER_GAP;
  }
  const bodyWidth = cursor - LAYER_GAP + MARGIN;

  // vertical placement: stack within the layer, center layers on a shared
  // axis so straight-through flows stay horizontal
  const layerHeights = layers.map((nodes) =>
    nodes.reduce((sum, n) => sum + sizes.get(n.id)!.h, 0) +
    NODE_GAP * (nodes.length - 1));
  const tallest = Math.max(...layerHeights);
  const axis = MARGIN + tallest / 2;

  const positioned = new Map<string, PositionedNode>();
  layers.forEach((nodes, index) => {
    let y = axis - layerHeights[index]! / 2;
    for (const node of nodes) {
      const size = sizes.get(node.id)!;
      positioned.set(node.id, {
        ...node,
        x: layerX[index]! + (layerWidths[index]! - size.w) / 2,
        y,
        w: size.w,
        h: size.h,
      });
      y += size.h + NODE_GAP;
    }
  });

  const bottom = Math.max(
    ...[...positioned.values()].map((n) => n.y + n.h));

  const edges: RoutedEdge[] = [];
  for (const edge of forward) {
    const s = positioned.get(edge.source)!;
    const t = positioned.get(edge.target)!;
    edges.push({
      ...edge,
      loopback: false,
      points: [
        { x: s.x + s.w, y: center(s).y },
        { x: t.x, y: center(t).y },
      ],
    });
  }
  // route each loopback in its own lane so parallel redo paths never merge
  loopbacks.forEach((edge, lane) => {
    const s = positioned.get(edge.source)!;
    const t = positioned.get(edge.target)!;
    const laneY = bottom + LANE_GAP * (lane + 1);
    edges.push({
      ...edge,
      loopback: true,
      points: [
        { x: center(s).x, y: s.y + s.h },
        { x: center(s).x, y: laneY },
        { x: center(t).x, y: laneY },
        { x: center(t).x, y: t.y + t.h },
      ],
    });
  });

  const height = bottom + LANE_GAP * (loopbacks.length + 1) + MARGIN;
  return {
    width: bodyWidth,
    height,
    nodes: graph.nodes.map((n) => positioned.get(n.id)!),
    edges,
  };
}

// Classic two-direction barycenter sweeps. A node with no neighbors in
// the fixed layer keeps its current position.
function orderByBarycenter(layers: RenderNode[][], forward: RenderEdge[],
                           layerOf: Map<string, number>): void {
  const preds = new Map<string, string[]>();
  const succs = new Map<string, string[]>();
  for (const edge of forward) {
    (succs.get(edge.source) ?? succs.set(edge.source, []).get(edge.source)!)
      .push(edge.target);
    (preds.get(edge.target) ?? preds.set(edge.target, []).get(edge.target)!)
      .push(edge.source);
  }

  const sweep = (neighborIds: Map<string, string[]>,
                 fixed: RenderNode[], moving: RenderNode[]): RenderNode[] => {
    const fixedIndex = new Map(fixed.map((n, i) => [n.id, i]));
    const score = new Map<string, number>();
    moving.forEach((node, index) => {
      const neighbors = (neighborIds.get(node.id) ?? [])
        .filter((id) => fixedIndex.has(id));
      score.set(node.id, neighbors.length === 0
        ? index
        : neighbors.reduce((sum, id) => sum + fixedIndex.get(id)!, 0) /
          neighbors.length);
    });
    return [...moving].sort((a, b) => score.get(a.id)! - score.get(b.id)!);
  };

  for (let pass = 0; pass < 4; pass++) {
    for (let i = 1; i < layers.length; i++) {
      layers[i] = sweep(preds, layers[i - 1]!, layers[i]!);
    }
    for (let i = layers.length - 2; i >= 0; i--) {
      layers[i] = sweep(succs, layers[i + 1]!, layers[i]!);
    }
  }
}
