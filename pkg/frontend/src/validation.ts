/**
 * Event/payload schemas for the session service and the client-side
 * feasibility gate: a submission may only leave the client when the rendered
 * distance meter shows the edit inside the budget.
 */

import { z } from "zod";

export const ConstraintSchema = z.union([
  z.object({ kind: z.literal("two-norm"), gamma: z.number().nonnegative() }),
  z.object({ kind: z.literal("box"), gammas: z.array(z.number().nonnegative()) }),
]);
export type Constraint = z.infer<typeof ConstraintSchema>;

export const QueryPayloadSchema = z.object({
  context: z.array(z.number()),
  action: z.number().int(),
  recourse: z.array(z.number()),
  ucb: z.number(),
  lcb: z.number(),
  ci: z.number(),
  constraint: ConstraintSchema,
  n_actions: z.number().int().positive(),
  d_immutable: z.number().int().nonnegative(),
  feature_labels: z.array(z.string()),
  timeout_s: z.number(),
});
export type QueryPayload = z.infer<typeof QueryPayloadSchema>;

export const StepPayloadSchema = z.object({
  action: z.number().int(),
  recourse: z.array(z.number()),
  ucb: z.number(),
  lcb: z.number(),
  ci: z.number(),
  source: z.enum(["AI", "Human"]),
  regret_step: z.number(),
  regret_cum: z.number(),
  queried: z.boolean(),
  adopted: z.boolean(),
  reward: z.number(),
  context: z.array(z.number()),
});
export type StepPayload = z.infer<typeof StepPayloadSchema>;

export const SessionEventSchema = z.discriminatedUnion("type", [
  z.object({ type: z.literal("step"), t: z.number().int(), payload: StepPayloadSchema }),
  z.object({ type: z.literal("query"), t: z.number().int(), payload: QueryPayloadSchema }),
  z.object({
    type: z.literal("finished"),
    t: z.number().int(),
    payload: z.object({ regret_cum: z.number(), total_queries: z.number().int() }),
  }),
]);
export type SessionEvent = z.infer<typeof SessionEventSchema>;

export function parseEvent(raw: unknown): SessionEvent {
  return SessionEventSchema.parse(raw);
}

/** Distance of an edited mutable block from the original, in the
 * constraint's own metric (Euclidean for the ball, per-dimension max excess
 * ratio for the box, so that 1.0 is the boundary in both cases). */
export function distanceMeter(
  edited: number[],
  original: number[],
  constraint: Constraint,
): { distance: number; limit: number; feasible: boolean } {
  if (edited.length !== original.length) {
    throw new Error(`length mismatch: ${edited.length} vs ${original.length}`);
  }
  if (constraint.kind === "two-norm") {
    const distance = Math.hypot(...edited.map((v, i) => v - original[i]));
    return { distance, limit: constraint.gamma, feasible: distance <= constraint.gamma + 1e-9 };
  }
  let worst = 0;
  for (let i = 0; i < edited.length; i++) {
    const excess = Math.abs(edited[i] - original[i]);
    const limit = constraint.gammas[i];
    worst = Math.max(worst, limit > 0 ? excess / limit : excess > 0 ? Infinity : 0);
  }
  return { distance: worst, limit: 1.0, feasible: worst <= 1.0 + 1e-9 };
}

/** Split a full context vector into its immutable and mutable blocks. */
export function splitContext(context: number[], dImmutable: number) {
  return {
    immutable: context.slice(0, dImmutable),
    mutable: context.slice(dImmutable),
  };
}

/** True when the form may be submitted: a valid action index and a feasible
 * mutable edit. */
export function canSubmit(
  action: number,
  edited: number[],
  query: QueryPayload,
): boolean {
  if (!Number.isInteger(action) || action < 0 || action >= query.n_actions) return false;
  const original = splitContext(query.context, query.d_immutable).mutable;
  return distanceMeter(edited, original, query.constraint).feasible;
}
