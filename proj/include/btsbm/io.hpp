#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "btsbm/model.hpp"
#include "btsbm/sampler.hpp"

namespace btsbm {

/// Match list `winner,loser[,count]` with a header row. Count defaults to 1;
/// repeated rows are summed. LF and CRLF line endings are accepted and fields
/// may be double-quoted. Identifiers get dense indices in order of first
/// appearance unless a roster fixes the order (and admits idle items).
ComparisonData parse_matches(std::istream& in, const std::vector<std::string>& roster = {});
ComparisonData load_matches(const std::filesystem::path& path, const std::vector<std::string>& roster = {});

/// Rows in edge order, i's wins first, zero counts omitted. Loading the
/// output with the same roster reproduces the data exactly.
void write_matches(std::ostream& out, const ComparisonData& data);
void write_matches(const std::filesystem::path& path, const ComparisonData& data);

/// One identifier per line, in index order.
std::vector<std::string> load_roster(const std::filesystem::path& path);
void write_roster(const std::filesystem::path& path, const std::vector<std::string>& names);

/// Versioned little-endian columnar trace: iteration, chain and K per draw,
/// then all labels, then all strengths (K values per draw).
void write_trace(const std::filesystem::path& path, const Trace& trace);
Trace read_trace(const std::filesystem::path& path);

/// CSV field, quoted when it holds a comma, quote or line break.
std::string csv_field(std::string_view s);
/// Splits one CSV record; throws DataError(line) on an unterminated quote.
std::vector<std::string> split_csv(std::string_view line, std::size_t line_no);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double x);

}  // namespace btsbm
