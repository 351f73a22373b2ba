/** Stable per-model hues: the chart lines and the table rows must always
 * agree, so assignment depends only on the ordering of the model set. */

const PALETTE = [
  "#1f77b4",
  "#ff7f0e",
  "#2ca02c",
  "#d62728",
  "#9467bd",
  "#8c564b",
  "#e377c2",
  "#17becf",
  "#bcbd22",
  "#7f7f7f",
  "#aec7e8",
  "#ffbb78",
];

export function colorAssignments(modelIds: number[]): Map<number, string> {
  const colors = new Map<number, string>();
  for (const id of modelIds) {
    if (!colors.has(id)) {
      colors.set(id, PALETTE[colors.size % PALETTE.length]);
    }
  }
  return colors;
}
