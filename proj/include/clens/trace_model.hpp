#pragma once

#include "clens/common.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace clens {

enum class EventKind : std::uint8_t { Entry, Exit, FieldWrite, FieldRead };

/// Sentinel object handles.
inline constexpr std::int32_t kExternal = -1;   // no enclosing frame / no reader
inline constexpr std::int32_t kStaticOwner = -2;
inline constexpr std::int32_t kNonObject = -3;  // primitive or null value

/// One trace event. `member` is the interned method (Entry/Exit) or field
/// (FieldWrite/FieldRead) id; `object` the callee or owner; `value` only
/// carries the stored object of a FieldWrite.
struct Event {
    std::uint64_t seq = 0;
    std::int32_t thread = 0;
    EventKind kind = EventKind::Entry;
    bool is_constructor = false;
    std::int32_t member = -1;
    std::int32_t object = kExternal;
    std::int32_t value = kNonObject;
};

struct ObjectInfo {
    std::string id;
    std::string type_name;
    std::uint64_t first_seq = 0;
    std::uint64_t last_seq = 0;
    bool seen_in_events = false;
};

/// Raw event as produced programmatically (unvalidated, string ids).
struct RawEvent {
    EventKind kind;
    std::uint64_t seq;
    std::string thread;
    std::string member;        // method or field id
    std::string object;        // callee / owner; "STATIC" allowed for writes
    std::string value;         // stored object for writes; "-" for non-object
    bool is_constructor = false;
};

/// An execution trace with all indices built in one streaming pass:
/// per-thread entry/exit pairing, caller links, per-thread event positions,
/// and object first/last appearances. Immutable once built.
class Trace {
public:
    [[nodiscard]] const std::vector<Event>& events() const { return events_; }
    [[nodiscard]] const Event& event_at(std::int32_t pos) const { return events_[static_cast<std::size_t>(pos)]; }

    /// Position of the matching Exit for an Entry (and vice versa); -1 if none.
    [[nodiscard]] std::int32_t match_of(std::int32_t pos) const { return match_[static_cast<std::size_t>(pos)]; }
    /// Position of the innermost enclosing Entry on the same thread; -1 if top-level.
    [[nodiscard]] std::int32_t parent_of(std::int32_t pos) const { return parent_[static_cast<std::size_t>(pos)]; }

    /// Callee object of the enclosing frame of entry event `pos`, or kExternal.
    [[nodiscard]] std::int32_t caller_of(std::int32_t pos) const;

    /// Event positions with seq in [seq_start, seq_end] on `thread`, in order.
    [[nodiscard]] std::vector<std::int32_t> slice(std::uint64_t seq_start, std::uint64_t seq_end,
                                                  std::int32_t thread) const;

    [[nodiscard]] std::int32_t position_of_seq(std::uint64_t seq) const;  // -1 if absent

    [[nodiscard]] const std::vector<ObjectInfo>& objects() const { return objects_; }
    [[nodiscard]] const ObjectInfo& object_at(std::int32_t obj) const { return objects_[static_cast<std::size_t>(obj)]; }
    [[nodiscard]] std::int32_t object_handle(std::string_view id) const { return object_syms_.lookup(id); }

    [[nodiscard]] const SymbolTable& methods() const { return method_syms_; }
    [[nodiscard]] const SymbolTable& fields() const { return field_syms_; }
    [[nodiscard]] const SymbolTable& threads() const { return thread_syms_; }

    [[nodiscard]] const std::vector<std::vector<std::int32_t>>& thread_positions() const { return by_thread_; }

    /// Index of `pos` within its thread's position list.
    [[nodiscard]] std::int32_t thread_rank(std::int32_t pos) const { return thread_rank_[static_cast<std::size_t>(pos)]; }

    [[nodiscard]] std::size_t auto_closed_entries() const { return auto_closed_; }

    /// Builds a trace from in-memory events (same validation as the file loader).
    static Trace from_events(const std::vector<RawEvent>& raw,
                             const std::vector<std::pair<std::string, std::string>>& object_types = {});

private:
    friend Trace load_trace_text(const std::string& text, const std::string& origin, bool progress);

    void finish_build();
    std::int32_t intern_object(std::string_view id);

    std::vector<Event> events_;
    std::vector<std::int32_t> match_;
    std::vector<std::int32_t> parent_;
    std::vector<std::int32_t> thread_rank_;
    std::vector<std::vector<std::int32_t>> by_thread_;
    std::vector<ObjectInfo> objects_;
    SymbolTable object_syms_, method_syms_, field_syms_, thread_syms_;
    std::size_t auto_closed_ = 0;
};

/// Loads a trace file (one event per line; see docs/trace_format.md).
/// Unclosed entries at EOF are auto-closed with a warning on stderr.
/// Throws InputError on malformed lines (with line number) and on Exit
/// events that match no open Entry (with seq).
Trace load_trace(const std::string& path, bool progress = false);
Trace load_trace_text(const std::string& text, const std::string& origin, bool progress = false);

}  // namespace clens
