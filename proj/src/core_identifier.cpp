#include "clens/core_identifier.hpp"

#include <algorithm>
#include <charconv>
#include <deque>
#include <unordered_set>

namespace clens {

std::string escape_state_name(EscapeState s) {
    switch (s) {
        case EscapeState::Captured: return "Captured";
        case EscapeState::ReferenceEscape: return "ReferenceEscape";
        case EscapeState::GlobalEscape: return "GlobalEscape";
    }
    return "?";
}

void RankingConfig::validate() const {
    if (lt_long < 0.0 || lt_long > 1.0 || lt_short < 0.0 || lt_short > 1.0)
        throw UsageError("lifetime threshold factors must lie in [0,1]");
    if (lt_short > lt_long)
        throw UsageError("L_t_short must not exceed L_t_long");
    if (importance_threshold < 0.0)
        throw UsageError("importance threshold must be non-negative");
}

std::vector<EscapeState> assign_escape_states(const Trace& trace) {
    const auto n_objects = trace.objects().size();
    std::vector<EscapeState> states(n_objects, EscapeState::Captured);

    // Reference graph owner -> stored value, deduplicated; static writes seed
    // the GlobalEscape frontier.
    std::vector<std::vector<std::int32_t>> edges(n_objects);
    std::unordered_set<std::uint64_t> seen;
    std::deque<std::int32_t> frontier;

    for (const auto& e : trace.events()) {
        if (e.kind != EventKind::FieldWrite || e.value < 0) continue;
        if (e.object == kStaticOwner) {
            if (states[static_cast<std::size_t>(e.value)] != EscapeState::GlobalEscape) {
                states[static_cast<std::size_t>(e.value)] = EscapeState::GlobalEscape;
                frontier.push_back(e.value);
            }
            continue;
        }
        if (e.object == e.value) continue;  // self-reference: not another object's field
        auto key = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(e.object)) << 32) |
                   static_cast<std::uint32_t>(e.value);
        if (seen.insert(key).second) edges[static_cast<std::size_t>(e.object)].push_back(e.value);
        if (states[static_cast<std::size_t>(e.value)] == EscapeState::Captured)
            states[static_cast<std::size_t>(e.value)] = EscapeState::ReferenceEscape;
    }

    while (!frontier.empty()) {
        auto o = frontier.front();
        frontier.pop_front();
        for (auto v : edges[static_cast<std::size_t>(o)]) {
            if (states[static_cast<std::size_t>(v)] != EscapeState::GlobalEscape) {
                states[static_cast<std::size_t>(v)] = EscapeState::GlobalEscape;
                frontier.push_back(v);
            }
        }
    }
    return states;
}

std::vector<ObjectProfile> build_profiles(const Trace& trace) {
    const auto n_objects = trace.objects().size();
    std::vector<ObjectProfile> profiles(n_objects);
    for (std::size_t i = 0; i < n_objects; ++i) {
        const auto& info = trace.objects()[i];
        auto& p = profiles[i];
        p.object = static_cast<std::int32_t>(i);
        p.object_id = info.id;
        p.type_name = info.type_name;
        p.lifetime = info.seen_in_events ? info.last_seq - info.first_seq : 0;
    }

    auto states = assign_escape_states(trace);
    for (std::size_t i = 0; i < n_objects; ++i) profiles[i].escape_state = states[i];

    const auto& events = trace.events();
    for (std::size_t pos = 0; pos < events.size(); ++pos) {
        const auto& e = events[pos];
        // Accessor = callee object of the active frame; kExternal counts as
        // another accessor, only owner == accessor is a self-access.
        switch (e.kind) {
            case EventKind::Entry: {
                auto caller = trace.caller_of(static_cast<std::int32_t>(pos));
                if (caller != e.object) profiles[static_cast<std::size_t>(e.object)].invoke_freq++;
                break;
            }
            case EventKind::FieldWrite: {
                if (e.object < 0) break;  // static owner: no object receives the write
                auto parent = trace.parent_of(static_cast<std::int32_t>(pos));
                auto writer = parent < 0 ? kExternal : events[static_cast<std::size_t>(parent)].object;
                if (writer != e.object) profiles[static_cast<std::size_t>(e.object)].write_freq++;
                break;
            }
            case EventKind::FieldRead: {
                auto parent = trace.parent_of(static_cast<std::int32_t>(pos));
                auto reader = parent < 0 ? kExternal : events[static_cast<std::size_t>(parent)].object;
                if (reader != e.object) profiles[static_cast<std::size_t>(e.object)].read_freq++;
                break;
            }
            case EventKind::Exit:
                break;
        }
    }
    return profiles;
}

double importance_of(std::uint64_t w, std::uint64_t r, std::uint64_t m) {
    if (w == 0 || r == 0 || m == 0) return 0.0;
    return 3.0 / (1.0 / static_cast<double>(w) + 1.0 / static_cast<double>(r) + 1.0 / static_cast<double>(m));
}

void compute_importance(std::vector<ObjectProfile>& profiles) {
    for (auto& p : profiles) p.importance = importance_of(p.write_freq, p.read_freq, p.invoke_freq);
}

void mark_temporaries(std::vector<ObjectProfile>& profiles, const RankingConfig& config) {
    config.validate();
    std::uint64_t lifetime_max = 0;
    for (const auto& p : profiles) lifetime_max = std::max(lifetime_max, p.lifetime);
    const double max_d = static_cast<double>(lifetime_max);
    for (auto& p : profiles) {
        const double lt = static_cast<double>(p.lifetime);
        p.is_temporary =
            (p.escape_state == EscapeState::Captured && lt < max_d * config.lt_long) ||
            (p.escape_state == EscapeState::ReferenceEscape && lt < max_d * config.lt_short);
    }
}

namespace {

bool ranking_less(const ObjectProfile& a, const ObjectProfile& b) {
    if (a.importance != b.importance) return a.importance > b.importance;
    if (a.type_name != b.type_name) return a.type_name < b.type_name;
    return a.object_id < b.object_id;
}

}  // namespace

Ranking build_ranking(const std::vector<ObjectProfile>& profiles, const RankingConfig& config) {
    config.validate();
    std::vector<const ObjectProfile*> live;
    for (const auto& p : profiles)
        if (!p.is_temporary) live.push_back(&p);
    std::sort(live.begin(), live.end(),
              [](const ObjectProfile* a, const ObjectProfile* b) { return ranking_less(*a, *b); });
    Ranking r;
    r.objects.reserve(live.size());
    for (const auto* p : live) r.objects.push_back(p->object);
    return r;
}

std::string serialize_profiles_csv(const std::vector<ObjectProfile>& profiles) {
    std::vector<const ObjectProfile*> order;
    order.reserve(profiles.size());
    for (const auto& p : profiles) order.push_back(&p);
    std::sort(order.begin(), order.end(), [](const ObjectProfile* a, const ObjectProfile* b) {
        if (a->is_temporary != b->is_temporary) return !a->is_temporary;
        return ranking_less(*a, *b);
    });

    std::string out = "object,type,escape_state,lifetime,write_freq,read_freq,invoke_freq,importance,is_temporary\n";
    for (const auto* p : order) {
        out += p->object_id;
        out += ',';
        out += p->type_name;
        out += ',';
        out += escape_state_name(p->escape_state);
        out += ',';
        out += std::to_string(p->lifetime);
        out += ',';
        out += std::to_string(p->write_freq);
        out += ',';
        out += std::to_string(p->read_freq);
        out += ',';
        out += std::to_string(p->invoke_freq);
        out += ',';
        out += format_double(p->importance);
        out += ',';
        out += p->is_temporary ? "true" : "false";
        out += '\n';
    }
    return out;
}

std::vector<ObjectProfile> parse_profiles_csv(const Trace& trace, const std::string& text,
                                              const std::string& origin) {
    std::vector<ObjectProfile> profiles(trace.objects().size());
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        profiles[i].object = static_cast<std::int32_t>(i);
        profiles[i].object_id = trace.objects()[i].id;
        profiles[i].type_name = trace.objects()[i].type_name;
    }

    std::size_t line_no = 0;
    std::size_t start = 0;
    bool header = true;
    while (start < text.size()) {
        auto nl = text.find('\n', start);
        if (nl == std::string::npos) nl = text.size();
        std::string_view line(text.data() + start, nl - start);
        start = nl + 1;
        ++line_no;
        if (line.empty()) continue;
        if (header) {
            header = false;
            continue;
        }
        std::vector<std::string_view> cols;
        std::size_t i = 0;
        while (true) {
            auto c = line.find(',', i);
            if (c == std::string_view::npos) {
                cols.push_back(line.substr(i));
                break;
            }
            cols.push_back(line.substr(i, c - i));
            i = c + 1;
        }
        if (cols.size() != 9)
            input_error(origin + ": malformed line " + std::to_string(line_no) + ": expected 9 columns");
        auto handle = trace.object_handle(cols[0]);
        if (handle < 0)
            input_error(origin + ": line " + std::to_string(line_no) + " references unknown object: " + std::string(cols[0]));
        auto& p = profiles[static_cast<std::size_t>(handle)];
        auto parse_u64 = [&](std::string_view s) {
            std::uint64_t v = 0;
            auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc() || ptr != s.data() + s.size())
                input_error(origin + ": malformed number on line " + std::to_string(line_no));
            return v;
        };
        if (cols[2] == "Captured") p.escape_state = EscapeState::Captured;
        else if (cols[2] == "ReferenceEscape") p.escape_state = EscapeState::ReferenceEscape;
        else if (cols[2] == "GlobalEscape") p.escape_state = EscapeState::GlobalEscape;
        else input_error(origin + ": unknown escape state on line " + std::to_string(line_no));
        p.lifetime = parse_u64(cols[3]);
        p.write_freq = parse_u64(cols[4]);
        p.read_freq = parse_u64(cols[5]);
        p.invoke_freq = parse_u64(cols[6]);
        {
            double v = 0.0;
            auto s = cols[7];
            auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc() || ptr != s.data() + s.size())
                input_error(origin + ": malformed importance on line " + std::to_string(line_no));
            p.importance = v;
        }
        if (cols[8] == "true") p.is_temporary = true;
        else if (cols[8] == "false") p.is_temporary = false;
        else input_error(origin + ": malformed is_temporary on line " + std::to_string(line_no));
    }
    return profiles;
}

}  // namespace clens
