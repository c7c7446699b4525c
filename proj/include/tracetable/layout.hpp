#pragma once

// Geometry of the enhanced trace table: one column per thread holding a tree
// of boxes, one event per row. Pixel sizes are left to the client.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "tracetable/trace.hpp"

namespace tracetable {

struct Box {
  std::string threadName;
  std::size_t depth = 0;
  std::size_t startRow = 0;
  std::size_t endRow = 0;
  std::string label;
  /// Thread root (main() or the thread's run method); has no event of its own.
  bool synthetic = false;
  std::size_t colorIndex = 0;
  /// Event drawn by this box; 0 for synthetic roots.
  std::size_t eventSeq = 0;

  bool operator==(const Box&) const = default;
};

/// Client palette: index 0 is yellow (main), 1 green, then further hues.
inline constexpr std::string_view kPalette[] = {"#f5d742", "#6cc46c", "#6fa8dc", "#e06666",
                                                "#b4a7d6", "#f6b26b", "#76d7c4", "#c27ba0"};

struct TableLayout {
  std::size_t rowCount = 0;
  std::vector<std::string> threadColumns;
  std::vector<Box> boxes;
  std::vector<std::size_t> inputRows;

  bool operator==(const TableLayout&) const = default;
};

TableLayout layout(const Trace& trace);

/// Rows inside a thread's root span where that thread has no event.
std::vector<std::size_t> interior_gaps(const TableLayout& table, std::string_view threadName);

struct ReplayState {
  std::size_t cursor = 1;
  std::size_t highlightedSourceLine = 0;
  std::size_t highlightedTraceRow = 1;

  bool operator==(const ReplayState&) const = default;
};

enum class Direction { Forward, Backward };

/// Cursor on the first event. Throws std::invalid_argument for an empty trace.
ReplayState replay_init(const Trace& trace);

/// Moves one row, saturating at 1 and N.
ReplayState replay_step(const ReplayState& state, Direction direction, const Trace& trace);

/// State for an arbitrary cursor, clamped into [1, N].
ReplayState replay_at(const Trace& trace, std::size_t cursor);

}  // namespace tracetable
