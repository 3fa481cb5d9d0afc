// Wire types for the session service API. Composite type names arrive as
// encoded grammar strings and are treated as opaque identifiers here: every
// label and color in the UI derives from them.

export interface OperationRequest {
  kind: "drill-down" | "roll-up" | "unfold" | "fold";
  object_type: string;
  attribute?: string;
  event_type?: string;
  qualifiers?: string[];
}

export interface CatalogNode {
  type: string;
  count: number;
  drillable: string[];
  children: CatalogNode[];
}

export interface EventVariant {
  type: string;
  count: number;
}

export interface Catalog {
  object_types: { base: string; tree: CatalogNode }[];
  event_types: { base: string; variants: EventVariant[] }[];
}

export interface Summary {
  events: number;
  objects: number;
  e2o: number;
  o2o: number;
  event_types: string[];
  object_types: string[];
  catalog: Catalog;
}

export interface DfgNode {
  event_type: string;
  frequency: number;
}

export interface DfgArc {
  source: string;
  target: string;
  object_type: string;
  frequency: number;
}

export interface DfgEndpoint {
  object_type: string;
  event_type: string;
  count: number;
}

export interface Dfg {
  nodes: DfgNode[];
  arcs: DfgArc[];
  starts: DfgEndpoint[];
  ends: DfgEndpoint[];
}

export interface SessionCreated {
  session_id: string;
  version: number;
  summary: Summary;
}

export interface OperationApplied {
  version: number;
  summary: Summary;
  dfg: Dfg;
}

export interface SessionInfo {
  session_id: string;
  version: number;
  history: OperationRequest[];
  summary: Summary;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}
