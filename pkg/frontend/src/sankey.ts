/** Layout for the journey Sankey: nodes ordered by total throughput
 * descending (ties broken by id), one ribbon per link with thickness
 * proportional to its flow count.
 */
import { Sankey } from "./types.js";

export interface Ribbon {
  source: string;
  target: string;
  value: number;
  /** vertical extent in px, stacked per layout */
  thickness: number;
  y0: number;
  y1: number;
}

export interface SankeyLayout {
  nodeOrder: string[];
  ribbons: Ribbon[];
  ambiguousDevices: number;
}

export function layoutSankey(sankey: Sankey, height = 240): SankeyLayout {
  const throughput = new Map<string, number>();
  for (const node of sankey.nodes) throughput.set(node.id, 0);
  for (const link of sankey.links) {
    throughput.set(link.source, (throughput.get(link.source) ?? 0) + link.value);
    throughput.set(link.target, (throughput.get(link.target) ?? 0) + link.value);
  }
  const nodeOrder = [...throughput.keys()].sort(
    (a, b) => throughput.get(b)! - throughput.get(a)! || a.localeCompare(b),
  );

  const total = sankey.links.reduce((acc, l) => acc + l.value, 0);
  const ribbons: Ribbon[] = [];
  let y = 0;
  for (const link of [...sankey.links].sort((a, b) => b.value - a.value)) {
    const thickness = total > 0 ? (link.value / total) * height : 0;
    ribbons.push({
      source: link.source,
      target: link.target,
      value: link.value,
      thickness,
      y0: y,
      y1: y + thickness,
    });
    y += thickness;
  }
  return { nodeOrder, ribbons, ambiguousDevices: sankey.ambiguous_devices };
}
