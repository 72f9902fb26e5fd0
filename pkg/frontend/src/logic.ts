// Pure presentation logic, kept free of DOM and network so it is directly
// unit-testable.

import type { OverlayPlot, QueueCard } from "./types.js";

export function isFlag(card: Pick<QueueCard, "disposition">): boolean {
  return card.disposition === "flag_fp" || card.disposition === "flag_fn";
}

/** Server queue order is authoritative; this only filters. */
export function visibleCards(
  cards: QueueCard[],
  flagsOnly: boolean,
  hideDecided: boolean,
): QueueCard[] {
  return cards.filter(
    (c) => (!flagsOnly || isFlag(c)) && (!hideDecided || c.decided_label === null),
  );
}

export function dispositionLabel(card: QueueCard): string {
  switch (card.disposition) {
    case "flag_fp":
      return "suspected FP";
    case "flag_fn":
      return "suspected FN";
    case "indeterminate_accept_model":
      return "accepted (no cohort)";
    default:
      return "accepted";
  }
}

export function labelName(label: 0 | 1 | number): string {
  return label === 1 ? "attack" : "benign";
}

export function formatConfidence(confidence: number): string {
  return (confidence * 100).toFixed(1) + "%";
}

/** Recount overlaps from the bars; must agree with the panel's plot_sim. */
export function overlapCount(plot: OverlayPlot): number {
  return plot.bars.reduce((n, bar) => n + (bar.overlap ? 1 : 0), 0);
}

export interface BarGeometry {
  feature: string;
  /** widths as fractions of the half-axis, signed: [-1, 1] */
  groupFrac: number;
  instanceFrac: number;
  overlap: boolean;
}

/**
 * Scale both bar series of a panel to a shared symmetric axis so the group
 * mean and the instance value are visually comparable.
 */
export function panelGeometry(plot: OverlayPlot): BarGeometry[] {
  let extent = 0;
  for (const bar of plot.bars) {
    extent = Math.max(extent, Math.abs(bar.group_mean_phi), Math.abs(bar.instance_phi));
  }
  if (extent === 0) extent = 1;
  return plot.bars.map((bar) => ({
    feature: bar.feature,
    groupFrac: bar.group_mean_phi / extent,
    instanceFrac: bar.instance_phi / extent,
    overlap: bar.overlap,
  }));
}

export interface QueueCounts {
  total: number;
  flagged: number;
  decided: number;
}

export function queueCounts(cards: QueueCard[]): QueueCounts {
  return {
    total: cards.length,
    flagged: cards.filter(isFlag).length,
    decided: cards.filter((c) => c.decided_label !== null).length,
  };
}

/** Accuracy per outcome group for the report view, as "correct/tested". */
export function reportRows(
  groups: Record<string, { tested: number; correct: number }> | null,
): Array<{ group: string; tested: number; correct: number; text: string }> {
  if (!groups) return [];
  return ["TP", "TN", "FP", "FN"]
    .filter((g) => g in groups)
    .map((g) => {
      const { tested, correct } = groups[g]!;
      return { group: g, tested, correct, text: `${correct}/${tested}` };
    });
}
