#pragma once

#include "clens/trace_model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace clens {

enum class EscapeState : std::uint8_t { Captured = 0, ReferenceEscape = 1, GlobalEscape = 2 };

[[nodiscard]] std::string escape_state_name(EscapeState s);

struct ObjectProfile {
    std::int32_t object = -1;
    std::string object_id;
    std::string type_name;
    EscapeState escape_state = EscapeState::Captured;
    std::uint64_t lifetime = 0;
    // Accesses received from other objects only; self-accesses are excluded.
    std::uint64_t write_freq = 0;
    std::uint64_t read_freq = 0;
    std::uint64_t invoke_freq = 0;
    double importance = 0.0;
    bool is_temporary = false;
};

struct RankingConfig {
    double lt_long = 0.5;   // long-lived threshold factor for Captured objects
    double lt_short = 0.1;  // short-lived threshold factor for ReferenceEscape objects
    double importance_threshold = 0.0;  // I_t

    void validate() const;
};

/// Object handles sorted by importance descending; temporaries excluded.
/// Ties break by (type name, object id).
struct Ranking {
    std::vector<std::int32_t> objects;
};

/// Escape state per object: GlobalEscape iff reachable through field-write
/// edges from a static write; ReferenceEscape iff stored in another object's
/// field; Captured otherwise. Flow-insensitive over the whole trace.
std::vector<EscapeState> assign_escape_states(const Trace& trace);

/// Profiles with escape states, lifetimes, and access frequencies filled in.
std::vector<ObjectProfile> build_profiles(const Trace& trace);

/// Harmonic mean of the three frequencies; 0 whenever any of them is 0.
double importance_of(std::uint64_t w, std::uint64_t r, std::uint64_t m);
void compute_importance(std::vector<ObjectProfile>& profiles);

/// Applies the temporary-object condition with Lifetime_max taken over all
/// objects in `profiles`.
void mark_temporaries(std::vector<ObjectProfile>& profiles, const RankingConfig& config);

Ranking build_ranking(const std::vector<ObjectProfile>& profiles, const RankingConfig& config);

/// CSV as emitted by the `rank` subcommand: profiles in ranking order first,
/// then temporaries under the same comparator.
std::string serialize_profiles_csv(const std::vector<ObjectProfile>& profiles);
std::vector<ObjectProfile> parse_profiles_csv(const Trace& trace, const std::string& text,
                                              const std::string& origin);

}  // namespace clens
