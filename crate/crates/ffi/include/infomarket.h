#ifndef INFOMARKET_H
#define INFOMARKET_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum ImStatus {
  IM_STATUS_OK = 0,
  IM_STATUS_NULL_POINTER = 1,
  IM_STATUS_INVALID_ARGUMENT = 2,
  IM_STATUS_UTF8 = 3,
  IM_STATUS_PARSE = 4,
  /**
   * No equilibrium, no crossover, or no route.
   */
  IM_STATUS_NO_SOLUTION = 5,
  IM_STATUS_NON_CONVERGENCE = 6,
  IM_STATUS_OUT_OF_RANGE = 7,
  IM_STATUS_PANIC = 8,
} ImStatus;

/**
 * Completed Meek count.
 */
typedef struct ImElection ImElection;

/**
 * Directed spread graph.
 */
typedef struct ImGraph ImGraph;

/**
 * Two-sided preference profile.
 */
typedef struct ImProfile ImProfile;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *im_last_error_message(void);

/**
 * Closed-form equilibrium of `S = a·P`, `D = b − c·P`.
 */
enum ImStatus im_equilibrium(double supply_slope,
                             double demand_intercept,
                             double demand_slope,
                             double *price,
                             double *quantity);

/**
 * Per-round payoff of providing fake (`is_fake`) or true news at harm `harm`.
 */
enum ImStatus im_harm_payoff(double fake_base,
                             double harm_penalty,
                             double truth_payoff,
                             bool is_fake,
                             double harm,
                             double *payoff);

/**
 * Harm level at which fake and true news pay the same.
 */
enum ImStatus im_crossover_harm(double fake_base,
                                double harm_penalty,
                                double truth_payoff,
                                double *harm);

enum ImStatus im_droop_quota(double valid_votes, size_t seats, double *quota);

/**
 * Plurality winner over `len` vote counts; `tie` is set when the lowest
 * index was chosen among equal leaders.
 */
enum ImStatus im_fptp_winner(const double *votes, size_t len, size_t *winner, bool *tie);

enum ImStatus im_retention(double initial, double gamma, double t, double *value);

/**
 * Utility of `k` pieces of information. `exponent <= 0` selects the
 * submodular curve; otherwise the Metzler curve with that exponent.
 */
enum ImStatus im_utility(double scale, double exponent, uint64_t k, double *value);

/**
 * Parses ballots (`weight : A > B > C` per line, `#` comments) and runs a
 * Meek count. Candidates are all names that appear on some ballot.
 */
enum ImStatus im_election_count(const char *ballots,
                                size_t seats,
                                double tolerance,
                                struct ImElection **election);

/**
 * Number of winners, or 0 for a null handle.
 */
size_t im_election_winner_count(const struct ImElection *election);

size_t im_election_round_count(const struct ImElection *election);

bool im_election_tie_broken(const struct ImElection *election);

/**
 * Name of the `index`-th winner in election order, or null when out of
 * range. Owned by the handle.
 */
const char *im_election_winner(const struct ImElection *election, size_t index);

void im_election_free(struct ImElection *election);

/**
 * Builds a profile from complete rankings in row-major order:
 * `provider_prefs` holds `providers × consumers` consumer indices, best
 * first, and `consumer_prefs` holds `consumers × providers`.
 */
enum ImStatus im_profile_new(const size_t *provider_prefs,
                             size_t providers,
                             const size_t *consumer_prefs,
                             size_t consumers,
                             struct ImProfile **profile);

/**
 * Stable matching by deferred acceptance. Writes each provider's consumer
 * index, or -1 if unmatched, into `partners[0..len]`; `len` must equal the
 * number of providers.
 */
enum ImStatus im_profile_match(const struct ImProfile *profile,
                               bool consumers_propose,
                               ptrdiff_t *partners,
                               size_t len);

void im_profile_free(struct ImProfile *profile);

/**
 * Parses an edge list (`from to cost` per line, `#` comments).
 */
enum ImStatus im_graph_parse(const char *edges, struct ImGraph **graph);

/**
 * Cheapest route from `source` to `target`. `path` receives the node ids
 * separated by single spaces; free it with `im_string_free`.
 */
enum ImStatus im_graph_shortest_path(const struct ImGraph *graph,
                                     const char *source,
                                     const char *target,
                                     double *cost,
                                     char **path);

void im_graph_free(struct ImGraph *graph);

/**
 * Releases a string returned by this library.
 */
void im_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* INFOMARKET_H */
