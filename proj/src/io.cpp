#include "btsbm/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>

#include "btsbm/errors.hpp"

namespace btsbm {

static_assert(std::endian::native == std::endian::little, "trace format assumes a little-endian host");

namespace {

constexpr std::array<char, 8> kTraceMagic{'B', 'T', 'S', 'B', 'M', 'T', 'R', '\0'};
constexpr std::uint32_t kTraceVersion = 1;

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t')) --e;
  return std::string(s.substr(b, e - b));
}

bool is_header(const std::vector<std::string>& fields) {
  return (fields.size() == 2 || fields.size() == 3) && fields[0] == "winner" && fields[1] == "loser" &&
         (fields.size() == 2 || fields[2] == "count");
}

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void put_all(std::ostream& out, const std::vector<T>& v) {
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw DataError("trace file truncated");
  return v;
}

template <typename T>
std::vector<T> get_all(std::istream& in, std::size_t n) {
  std::vector<T> v(n);
  if (!in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T)))) {
    throw DataError("trace file truncated");
  }
  return v;
}

}  // namespace

std::vector<std::string> split_csv(std::string_view line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char c = line[k];
    if (quoted) {
      if (c == '"') {
        if (k + 1 < line.size() && line[k + 1] == '"') {
          cur.push_back('"');
          ++k;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"' && trim(cur).empty()) {
      cur.clear();
      quoted = was_quoted = true;
    } else if (c == ',') {
      fields.push_back(was_quoted ? cur : trim(cur));
      cur.clear();
      was_quoted = false;
    } else {
      cur.push_back(c);
    }
  }
  if (quoted) throw DataError("unterminated quoted field", line_no);
  fields.push_back(was_quoted ? cur : trim(cur));
  return fields;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos && trim(s).size() == s.size()) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string format_double(double x) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), ptr);
}

ComparisonData parse_matches(std::istream& in, const std::vector<std::string>& roster) {
  std::unordered_map<std::string, int> index;
  std::vector<std::string> names = roster;
  for (std::size_t k = 0; k < roster.size(); ++k) {
    if (!index.emplace(roster[k], static_cast<int>(k)).second) throw DataError("duplicate roster entry " + roster[k]);
  }
  auto lookup = [&](const std::string& name, std::size_t line_no) {
    if (name.empty()) throw DataError("empty identifier", line_no);
    auto it = index.find(name);
    if (it != index.end()) return it->second;
    if (!roster.empty()) throw DataError("identifier not in roster: " + name, line_no);
    const int id = static_cast<int>(names.size());
    index.emplace(name, id);
    names.push_back(name);
    return id;
  };

  std::vector<WinRecord> records;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (trim(line).empty()) continue;
    const auto fields = split_csv(line, line_no);
    if (!header_seen) {
      if (!is_header(fields)) throw DataError("expected header 'winner,loser[,count]'", line_no);
      header_seen = true;
      continue;
    }
    if (fields.size() < 2 || fields.size() > 3) throw DataError("expected 2 or 3 fields", line_no);
    int count = 1;
    if (fields.size() == 3 && !fields[2].empty()) {
      const std::string& c = fields[2];
      auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), count);
      if (ec != std::errc() || ptr != c.data() + c.size()) throw DataError("invalid count '" + c + "'", line_no);
      if (count < 0) throw DataError("negative count", line_no);
    }
    if (fields[0] == fields[1]) throw DataError("self-match for '" + fields[0] + "'", line_no);
    const int w = lookup(fields[0], line_no);
    const int l = lookup(fields[1], line_no);
    records.push_back({w, l, count});
  }
  const int n = static_cast<int>(names.size());
  return ComparisonData(n, records, std::move(names));
}

ComparisonData load_matches(const std::filesystem::path& path, const std::vector<std::string>& roster) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_matches(in, roster);
}

void write_matches(std::ostream& out, const ComparisonData& data) {
  const auto& names = data.names();
  out << "winner,loser,count\n";
  for (const Edge& e : data.edges()) {
    if (e.wins_ij > 0) out << csv_field(names[e.i]) << ',' << csv_field(names[e.j]) << ',' << e.wins_ij << '\n';
    if (e.wins_ji > 0) out << csv_field(names[e.j]) << ',' << csv_field(names[e.i]) << ',' << e.wins_ji << '\n';
  }
}

void write_matches(const std::filesystem::path& path, const ComparisonData& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_matches(out, data);
}

std::vector<std::string> load_roster(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) names.push_back(line);
  }
  return names;
}

void write_roster(const std::filesystem::path& path, const std::vector<std::string>& names) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& n : names) out << n << '\n';
}

void write_trace(const std::filesystem::path& path, const Trace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const auto n = static_cast<std::uint32_t>(trace.n_items);
  const auto d = static_cast<std::uint64_t>(trace.draws.size());
  out.write(kTraceMagic.data(), kTraceMagic.size());
  put(out, kTraceVersion);
  put(out, static_cast<std::uint32_t>(trace.model == ModelKind::kBt ? 1 : 0));
  put(out, n);
  put(out, d);

  std::vector<std::uint64_t> iterations;
  std::vector<std::int32_t> chains, ks, labels;
  std::vector<double> strengths;
  for (const Draw& dr : trace.draws) {
    if (dr.labels.size() != n) throw DomainError("draw size does not match item count");
    iterations.push_back(dr.iteration);
    chains.push_back(dr.chain);
    ks.push_back(dr.num_blocks());
    labels.insert(labels.end(), dr.labels.begin(), dr.labels.end());
    strengths.insert(strengths.end(), dr.strengths.begin(), dr.strengths.end());
  }
  put_all(out, iterations);
  put_all(out, chains);
  put_all(out, ks);
  put_all(out, labels);
  put_all(out, strengths);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

Trace read_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kTraceMagic) throw DataError("not a trace file");
  const auto version = get<std::uint32_t>(in);
  if (version != kTraceVersion) throw DataError("unsupported trace version " + std::to_string(version));
  Trace trace;
  trace.model = get<std::uint32_t>(in) == 1 ? ModelKind::kBt : ModelKind::kBtSbm;
  const auto n = get<std::uint32_t>(in);
  const auto d = get<std::uint64_t>(in);
  trace.n_items = static_cast<int>(n);
  const auto iterations = get_all<std::uint64_t>(in, d);
  const auto chains = get_all<std::int32_t>(in, d);
  const auto ks = get_all<std::int32_t>(in, d);
  const auto labels = get_all<std::int32_t>(in, d * n);
  std::size_t total_k = 0;
  for (auto k : ks) {
    if (k < 1 || static_cast<std::uint32_t>(k) > n) throw DataError("corrupt block count in trace");
    total_k += static_cast<std::size_t>(k);
  }
  const auto strengths = get_all<double>(in, total_k);
  trace.draws.resize(d);
  std::size_t offset = 0;
  for (std::size_t t = 0; t < d; ++t) {
    Draw& dr = trace.draws[t];
    dr.iteration = iterations[t];
    dr.chain = chains[t];
    dr.labels.assign(labels.begin() + t * n, labels.begin() + (t + 1) * n);
    dr.strengths.assign(strengths.begin() + offset, strengths.begin() + offset + ks[t]);
    offset += ks[t];
  }
  return trace;
}

}  // namespace btsbm
