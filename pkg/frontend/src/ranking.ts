// Tie-group ranking: the drag board arranges comment labels into ordered
// groups (best first); items sharing a group are tied and submit the
// arithmetic mean of the positions they occupy.

export type TieGroups = string[][];

/** {A,B | C} -> {A: 1.5, B: 1.5, C: 3}. */
export function ranksFromTieGroups(groups: TieGroups): Record<string, number> {
  const ranks: Record<string, number> = {};
  let position = 1;
  for (const group of groups) {
    if (group.length === 0) continue;
    const mean = position + (group.length - 1) / 2;
    for (const label of group) {
      if (label in ranks) throw new Error(`duplicate label in tie groups: ${label}`);
      ranks[label] = mean;
    }
    position += group.length;
  }
  return ranks;
}

/** Move one label into the group at `groupIndex`, dropping empty groups. */
export function moveToGroup(groups: TieGroups, label: string, groupIndex: number): TieGroups {
  const without = groups.map((g) => g.filter((l) => l !== label));
  if (groupIndex < 0 || groupIndex >= without.length) {
    throw new Error(`no tie group at index ${groupIndex}`);
  }
  without[groupIndex] = [...without[groupIndex], label];
  return without.filter((g) => g.length > 0);
}

/** Split a label out of its tie group into a new group just below it. */
export function splitOut(groups: TieGroups, label: string): TieGroups {
  const result: TieGroups = [];
  for (const group of groups) {
    if (!group.includes(label)) {
      result.push([...group]);
      continue;
    }
    const rest = group.filter((l) => l !== label);
    if (rest.length > 0) result.push(rest);
    result.push([label]);
  }
  return result;
}

/** Every label placed exactly once. */
export function rankingComplete(groups: TieGroups, labels: readonly string[]): boolean {
  const placed = groups.flat();
  return placed.length === labels.length && labels.every((l) => placed.includes(l));
}
