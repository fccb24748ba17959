#include "clens/trace_model.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <unordered_map>

namespace clens {

namespace {

struct OpenFrame {
    std::int32_t pos;
    std::int32_t method;
    std::int32_t object;
};

// Per-thread parser state: call stack plus the interned thread handle.
struct ThreadState {
    std::vector<OpenFrame> stack;
};

}  // namespace

std::int32_t Trace::intern_object(std::string_view id) {
    auto handle = object_syms_.lookup(id);
    if (handle >= 0) return handle;
    handle = object_syms_.intern(id);
    objects_.push_back(ObjectInfo{std::string(id), "<unknown>", 0, 0, false});
    return handle;
}

std::int32_t Trace::caller_of(std::int32_t pos) const {
    auto p = parent_of(pos);
    return p < 0 ? kExternal : events_[static_cast<std::size_t>(p)].object;
}

std::int32_t Trace::position_of_seq(std::uint64_t seq) const {
    auto it = std::lower_bound(events_.begin(), events_.end(), seq,
                               [](const Event& e, std::uint64_t s) { return e.seq < s; });
    if (it == events_.end() || it->seq != seq) return -1;
    return static_cast<std::int32_t>(it - events_.begin());
}

std::vector<std::int32_t> Trace::slice(std::uint64_t seq_start, std::uint64_t seq_end,
                                       std::int32_t thread) const {
    std::vector<std::int32_t> out;
    if (seq_start > seq_end) input_error("slice: seq_start > seq_end");
    if (thread < 0 || static_cast<std::size_t>(thread) >= by_thread_.size()) return out;
    const auto& positions = by_thread_[static_cast<std::size_t>(thread)];
    auto lo = std::lower_bound(positions.begin(), positions.end(), seq_start,
                               [this](std::int32_t pos, std::uint64_t s) {
                                   return events_[static_cast<std::size_t>(pos)].seq < s;
                               });
    for (auto it = lo; it != positions.end(); ++it) {
        if (events_[static_cast<std::size_t>(*it)].seq > seq_end) break;
        out.push_back(*it);
    }
    return out;
}

void Trace::finish_build() {
    by_thread_.assign(thread_syms_.size(), {});
    thread_rank_.resize(events_.size());
    for (std::size_t pos = 0; pos < events_.size(); ++pos) {
        auto& lane = by_thread_[static_cast<std::size_t>(events_[pos].thread)];
        thread_rank_[pos] = static_cast<std::int32_t>(lane.size());
        lane.push_back(static_cast<std::int32_t>(pos));
    }
    for (std::size_t pos = 0; pos < events_.size(); ++pos) {
        const auto& e = events_[pos];
        auto touch = [&](std::int32_t obj) {
            if (obj < 0) return;
            auto& info = objects_[static_cast<std::size_t>(obj)];
            if (!info.seen_in_events) {
                info.first_seq = info.last_seq = e.seq;
                info.seen_in_events = true;
            } else {
                info.last_seq = e.seq;
            }
        };
        touch(e.object);
        if (e.kind == EventKind::FieldWrite) touch(e.value);
    }
}

namespace {

// Shared pairing pass: consumes parsed events already appended to the trace.
class PairingBuilder {
public:
    explicit PairingBuilder(std::vector<Event>& events, std::vector<std::int32_t>& match,
                            std::vector<std::int32_t>& parent)
        : events_(events), match_(match), parent_(parent) {}

    void on_event(std::int32_t pos) {
        auto& e = events_[static_cast<std::size_t>(pos)];
        auto& st = state_for(e.thread);
        match_.push_back(-1);
        parent_.push_back(st.stack.empty() ? -1 : st.stack.back().pos);
        switch (e.kind) {
            case EventKind::Entry:
                st.stack.push_back(OpenFrame{pos, e.member, e.object});
                break;
            case EventKind::Exit: {
                if (st.stack.empty() || st.stack.back().method != e.member ||
                    st.stack.back().object != e.object) {
                    input_error("unmatched Exit at seq " + std::to_string(e.seq));
                }
                auto entry_pos = st.stack.back().pos;
                st.stack.pop_back();
                match_[static_cast<std::size_t>(pos)] = entry_pos;
                match_[static_cast<std::size_t>(entry_pos)] = pos;
                parent_[static_cast<std::size_t>(pos)] =
                    parent_[static_cast<std::size_t>(entry_pos)];
                break;
            }
            case EventKind::FieldWrite:
            case EventKind::FieldRead:
                break;
        }
    }

    /// Synthesizes exits for unclosed frames; returns how many were added.
    std::size_t auto_close(std::vector<Event>& events, std::uint64_t& next_seq,
                           const std::vector<std::int32_t>& thread_order) {
        std::size_t closed = 0;
        for (auto th : thread_order) {
            auto it = states_.find(th);
            if (it == states_.end()) continue;
            auto& st = it->second;
            while (!st.stack.empty()) {
                const auto frame = st.stack.back();
                Event exit;
                exit.seq = next_seq++;
                exit.thread = th;
                exit.kind = EventKind::Exit;
                exit.member = frame.method;
                exit.object = frame.object;
                events.push_back(exit);
                on_event(static_cast<std::int32_t>(events.size() - 1));
                ++closed;
            }
        }
        return closed;
    }

private:
    ThreadState& state_for(std::int32_t thread) { return states_[thread]; }

    std::vector<Event>& events_;
    std::vector<std::int32_t>& match_;
    std::vector<std::int32_t>& parent_;
    std::unordered_map<std::int32_t, ThreadState> states_;
};

std::uint64_t parse_seq(std::string_view tok, std::size_t line_no, const std::string& origin) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size())
        input_error(origin + ": malformed line " + std::to_string(line_no) + ": bad seq '" + std::string(tok) + "'");
    return v;
}

[[noreturn]] void malformed(const std::string& origin, std::size_t line_no, const std::string& why) {
    input_error(origin + ": malformed line " + std::to_string(line_no) + ": " + why);
}

}  // namespace

Trace load_trace_text(const std::string& text, const std::string& origin, bool progress) {
    Trace trace;
    PairingBuilder pairing(trace.events_, trace.match_, trace.parent_);

    std::size_t line_estimate = static_cast<std::size_t>(
        std::count(text.begin(), text.end(), '\n'));
    trace.events_.reserve(line_estimate);
    trace.match_.reserve(line_estimate);
    trace.parent_.reserve(line_estimate);

    std::uint64_t prev_seq = 0;
    bool have_prev = false;
    std::size_t line_no = 0;
    std::vector<std::int32_t> thread_order;

    const char* cur = text.data();
    const char* end = text.data() + text.size();
    std::vector<std::string_view> toks;
    toks.reserve(8);

    while (cur < end) {
        ++line_no;
        const char* line_end = static_cast<const char*>(memchr(cur, '\n', static_cast<std::size_t>(end - cur)));
        if (line_end == nullptr) line_end = end;
        std::string_view line(cur, static_cast<std::size_t>(line_end - cur));
        cur = line_end < end ? line_end + 1 : end;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() || line.front() == '#') continue;

        toks.clear();
        std::size_t i = 0;
        while (i < line.size()) {
            std::size_t j = line.find(' ', i);
            if (j == std::string_view::npos) j = line.size();
            if (j > i) toks.push_back(line.substr(i, j - i));
            i = j + 1;
        }
        if (toks.empty()) continue;

        const auto tag = toks[0];
        if (tag == "O") {
            if (toks.size() != 3) malformed(origin, line_no, "O line needs <object_id> <type_name>");
            auto handle = trace.intern_object(toks[1]);
            auto& info = trace.objects_[static_cast<std::size_t>(handle)];
            if (info.type_name != "<unknown>" && info.type_name != toks[2])
                malformed(origin, line_no, "object " + std::string(toks[1]) + " declared twice with different types");
            info.type_name = std::string(toks[2]);
            continue;
        }

        Event e;
        if (tag == "E") {
            if (toks.size() != 5 && !(toks.size() == 6 && toks[5] == "C"))
                malformed(origin, line_no, "E line needs <seq> <thread> <method_id> <object_id> [C]");
            e.kind = EventKind::Entry;
            e.seq = parse_seq(toks[1], line_no, origin);
            e.thread = trace.thread_syms_.intern(toks[2]);
            e.member = trace.method_syms_.intern(toks[3]);
            e.object = trace.intern_object(toks[4]);
            e.is_constructor = toks.size() == 6;
        } else if (tag == "X") {
            if (toks.size() != 5) malformed(origin, line_no, "X line needs <seq> <thread> <method_id> <object_id>");
            e.kind = EventKind::Exit;
            e.seq = parse_seq(toks[1], line_no, origin);
            e.thread = trace.thread_syms_.intern(toks[2]);
            e.member = trace.method_syms_.intern(toks[3]);
            e.object = trace.intern_object(toks[4]);
        } else if (tag == "W") {
            if (toks.size() != 6) malformed(origin, line_no, "W line needs <seq> <thread> <owner|STATIC> <field_id> <value|->");
            e.kind = EventKind::FieldWrite;
            e.seq = parse_seq(toks[1], line_no, origin);
            e.thread = trace.thread_syms_.intern(toks[2]);
            e.object = toks[3] == "STATIC" ? kStaticOwner : trace.intern_object(toks[3]);
            e.member = trace.field_syms_.intern(toks[4]);
            e.value = toks[5] == "-" ? kNonObject : trace.intern_object(toks[5]);
        } else if (tag == "R") {
            if (toks.size() != 5) malformed(origin, line_no, "R line needs <seq> <thread> <owner> <field_id>");
            e.kind = EventKind::FieldRead;
            e.seq = parse_seq(toks[1], line_no, origin);
            e.thread = trace.thread_syms_.intern(toks[2]);
            e.object = trace.intern_object(toks[3]);
            e.member = trace.field_syms_.intern(toks[4]);
        } else {
            malformed(origin, line_no, "unknown event tag '" + std::string(tag) + "'");
        }

        if (have_prev && e.seq <= prev_seq)
            malformed(origin, line_no, "seq " + std::to_string(e.seq) + " not strictly increasing");
        prev_seq = e.seq;
        have_prev = true;

        if (std::find(thread_order.begin(), thread_order.end(), e.thread) == thread_order.end())
            thread_order.push_back(e.thread);

        trace.events_.push_back(e);
        pairing.on_event(static_cast<std::int32_t>(trace.events_.size() - 1));
        if (progress && trace.events_.size() % 1'000'000 == 0)
            std::fprintf(stderr, "%s: %zu events processed\n", origin.c_str(), trace.events_.size());
    }

    std::uint64_t next_seq = have_prev ? prev_seq + 1 : 1;
    trace.auto_closed_ = pairing.auto_close(trace.events_, next_seq, thread_order);
    if (trace.auto_closed_ > 0) {
        std::fprintf(stderr, "warning: %s: %zu unclosed entr%s auto-closed at end of trace\n",
                     origin.c_str(), trace.auto_closed_, trace.auto_closed_ == 1 ? "y" : "ies");
    }

    trace.finish_build();
    return trace;
}

Trace load_trace(const std::string& path, bool progress) {
    auto text = read_file(path);
    if (progress) std::fprintf(stderr, "loading trace %s (%zu bytes)\n", path.c_str(), text.size());
    auto trace = load_trace_text(text, path, progress);
    if (progress) std::fprintf(stderr, "loaded %zu events, %zu objects\n", trace.events().size(), trace.objects().size());
    return trace;
}

Trace Trace::from_events(const std::vector<RawEvent>& raw,
                         const std::vector<std::pair<std::string, std::string>>& object_types) {
    Trace trace;
    PairingBuilder pairing(trace.events_, trace.match_, trace.parent_);
    for (const auto& [id, type] : object_types) {
        auto handle = trace.intern_object(id);
        trace.objects_[static_cast<std::size_t>(handle)].type_name = type;
    }
    std::uint64_t prev_seq = 0;
    bool have_prev = false;
    std::vector<std::int32_t> thread_order;
    for (const auto& r : raw) {
        Event e;
        e.kind = r.kind;
        e.seq = r.seq;
        e.thread = trace.thread_syms_.intern(r.thread);
        e.is_constructor = r.is_constructor;
        switch (r.kind) {
            case EventKind::Entry:
            case EventKind::Exit:
                e.member = trace.method_syms_.intern(r.member);
                e.object = trace.intern_object(r.object);
                break;
            case EventKind::FieldWrite:
                e.object = r.object == "STATIC" ? kStaticOwner : trace.intern_object(r.object);
                e.member = trace.field_syms_.intern(r.member);
                e.value = r.value == "-" ? kNonObject : trace.intern_object(r.value);
                break;
            case EventKind::FieldRead:
                e.object = trace.intern_object(r.object);
                e.member = trace.field_syms_.intern(r.member);
                break;
        }
        if (have_prev && e.seq <= prev_seq) input_error("from_events: seq not strictly increasing");
        prev_seq = e.seq;
        have_prev = true;
        if (std::find(thread_order.begin(), thread_order.end(), e.thread) == thread_order.end())
            thread_order.push_back(e.thread);
        trace.events_.push_back(e);
        pairing.on_event(static_cast<std::int32_t>(trace.events_.size() - 1));
    }
    std::uint64_t next_seq = have_prev ? prev_seq + 1 : 1;
    trace.auto_closed_ = pairing.auto_close(trace.events_, next_seq, thread_order);
    trace.finish_build();
    return trace;
}

}  // namespace clens
