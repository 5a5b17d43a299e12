// Wire types mirroring the service's JSON responses.

export type View = "bpmn" | "pn";

export interface RenderNode {
  id: string;
  kind: string;
  label: string | null;
  rank: number;
}

export interface RenderEdge {
  source: string;
  target: string;
}

export interface RenderGraph {
  view: View;
  nodes: RenderNode[];
  edges: RenderEdge[];
}

export interface ModelStats {
  activity_count: number;
  operator_count: number;
  depth: number;
  silent_count: number;
}

export interface SessionSummary {
  session_id: string;
  attempts: number;
  stats: ModelStats;
  model: unknown;
}

export interface HistoryEvent {
  kind: string;
  attempts: number;
  timestamp: string;
  detail: string;
}

export interface HistoryResponse {
  session_id: string;
  description: string;
  events: HistoryEvent[];
  conversation?: { role: string; content: string }[];
}

export type ExportFormat = "powl-json" | "pnml" | "bpmn" | "pcl";

export const EXPORT_FORMATS: readonly ExportFormat[] = [
  "powl-json",
  "pnml",
  "bpmn",
  "pcl",
];
