// Operation menus are generated from the server's type catalog, so every
// request the UI can produce is well-formed by construction.

import { Catalog, CatalogNode, OperationRequest } from "./types.js";

export interface MenuOption {
  label: string;
  request: OperationRequest;
}

function walk(node: CatalogNode, visit: (node: CatalogNode) => void): void {
  visit(node);
  for (const child of node.children) {
    walk(child, visit);
  }
}

/** Split an encoded event-type name at unescaped "@" (escape char "\"). */
export function splitEventTypeName(encoded: string): string[] {
  const segments: string[] = [];
  let current = "";
  for (let i = 0; i < encoded.length; i++) {
    const ch = encoded[i];
    if (ch === "\\" && i + 1 < encoded.length) {
      current += ch + encoded[i + 1];
      i++;
    } else if (ch === "@") {
      segments.push(current);
      current = "";
    } else {
      current += ch;
    }
  }
  segments.push(current);
  return segments;
}

export function drillOptions(catalog: Catalog): MenuOption[] {
  const options: MenuOption[] = [];
  for (const { tree } of catalog.object_types) {
    walk(tree, (node) => {
      for (const attribute of node.drillable) {
        options.push({
          label: `drill down ${node.type} by ${attribute}`,
          request: {
            kind: "drill-down",
            object_type: node.type,
            attribute,
          },
        });
      }
    });
  }
  return options;
}

function unescapeName(escaped: string): string {
  let out = "";
  for (let i = 0; i < escaped.length; i++) {
    if (escaped[i] === "\\" && i + 1 < escaped.length) {
      out += escaped[i + 1];
      i++;
    } else {
      out += escaped[i];
    }
  }
  return out;
}

function drillAttributeOf(parent: string, child: string): string | null {
  // child = parent + "~" + attr + "=" + value, with structural chars escaped
  const suffix = child.slice(parent.length + 1);
  let attr = "";
  for (let i = 0; i < suffix.length; i++) {
    const ch = suffix[i];
    if (ch === "\\" && i + 1 < suffix.length) {
      attr += ch + suffix[i + 1];
      i++;
    } else if (ch === "=") {
      return unescapeName(attr);
    } else {
      attr += ch;
    }
  }
  return null;
}

export function rollUpOptions(catalog: Catalog): MenuOption[] {
  const options: MenuOption[] = [];
  for (const { tree } of catalog.object_types) {
    walk(tree, (node) => {
      const attributes = new Set<string>();
      for (const child of node.children) {
        const attribute = drillAttributeOf(node.type, child.type);
        if (attribute) {
          attributes.add(attribute);
        }
      }
      for (const attribute of attributes) {
        options.push({
          label: `roll up ${node.type} by ${attribute}`,
          request: { kind: "roll-up", object_type: node.type, attribute },
        });
      }
    });
  }
  return options;
}

export function unfoldOptions(catalog: Catalog): MenuOption[] {
  const objectTypes: string[] = [];
  for (const { tree } of catalog.object_types) {
    walk(tree, (node) => {
      if (node.count > 0) {
        objectTypes.push(node.type);
      }
    });
  }
  const options: MenuOption[] = [];
  for (const { variants } of catalog.event_types) {
    for (const variant of variants) {
      if (variant.count === 0) {
        continue;
      }
      for (const objectType of objectTypes) {
        options.push({
          label: `unfold ${variant.type} over ${objectType}`,
          request: {
            kind: "unfold",
            event_type: variant.type,
            object_type: objectType,
          },
        });
      }
    }
  }
  return options;
}

export function foldOptions(catalog: Catalog): MenuOption[] {
  const options: MenuOption[] = [];
  for (const { variants } of catalog.event_types) {
    for (const variant of variants) {
      const segments = splitEventTypeName(variant.type);
      if (segments.length < 2) {
        continue;
      }
      const objectType = segments[segments.length - 1];
      const parent = segments.slice(0, -1).join("@");
      options.push({
        label: `fold ${variant.type}`,
        request: { kind: "fold", event_type: parent, object_type: objectType },
      });
    }
  }
  return options;
}

export function allOptions(catalog: Catalog): Record<string, MenuOption[]> {
  return {
    "drill-down": drillOptions(catalog),
    "roll-up": rollUpOptions(catalog),
    unfold: unfoldOptions(catalog),
    fold: foldOptions(catalog),
  };
}
