#include "bridgenet/retweet.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "bridgenet/errors.hpp"

namespace bridgenet {

namespace {

bool is_blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isspace(c); });
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

}  // namespace

ParseReport parse_retweets(const std::filesystem::path& path, int day_min, int day_max) {
  if (day_min > day_max) {
    throw std::invalid_argument("parse_retweets: day_min must be <= day_max");
  }
  std::ifstream in(path);
  if (!in) throw IoError("parse_retweets: cannot open " + path.string());

  ParseReport report;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty() || is_blank(line) || line[0] == '#') continue;
    ++report.data_lines;

    const auto fields = split(line, '\t');
    if (fields.size() != 3 || fields[1].empty() || fields[2].empty() ||
        fields[1] == fields[2]) {
      report.malformed_lines.push_back(line_no);
      continue;
    }
    int day = 0;
    try {
      std::size_t used = 0;
      day = std::stoi(fields[0], &used);
      if (used != fields[0].size()) throw std::invalid_argument("trailing junk");
    } catch (const std::exception&) {
      report.malformed_lines.push_back(line_no);
      continue;
    }
    if (day < day_min || day > day_max) continue;
    report.records.push_back({day - day_min + 1, fields[1], fields[2]});
  }

  if (report.data_lines > 0 &&
      static_cast<double>(report.malformed_lines.size()) >
          0.01 * static_cast<double>(report.data_lines)) {
    throw FormatError("parse_retweets: more than 1% of lines are malformed in " + path.string(),
                      report.malformed_lines);
  }
  return report;
}

std::vector<RetweetRecord> systematic_subsample(const std::vector<RetweetRecord>& records,
                                                int n) {
  if (n < 1) throw std::invalid_argument("systematic_subsample: n must be >= 1");
  std::vector<RetweetRecord> kept;
  for (std::size_t k = 0; k < records.size(); k += static_cast<std::size_t>(n)) {
    kept.push_back(records[k]);
  }
  return kept;
}

IdeologyTable read_seed_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("read_seed_table: cannot open " + path.string());
  IdeologyTable table;
  std::string line;
  int line_no = 0;
  std::vector<int> bad;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty() || is_blank(line) || line[0] == '#') continue;
    if (line_no == 1 && line == "account,party") continue;
    const auto fields = split(line, ',');
    if (fields.size() != 2 || fields[0].empty() ||
        (fields[1] != "D" && fields[1] != "R")) {
      bad.push_back(line_no);
      continue;
    }
    table.party[fields[0]] = fields[1][0];
  }
  if (!bad.empty()) {
    throw FormatError("read_seed_table: malformed rows in " + path.string(), bad);
  }
  if (table.party.empty()) {
    throw FormatError("read_seed_table: no seed accounts in " + path.string(), {});
  }
  const bool has_d = std::any_of(table.party.begin(), table.party.end(),
                                 [](const auto& kv) { return kv.second == 'D'; });
  const bool has_r = std::any_of(table.party.begin(), table.party.end(),
                                 [](const auto& kv) { return kv.second == 'R'; });
  if (!has_d || !has_r) {
    throw FormatError("read_seed_table: both parties must be represented", {});
  }
  return table;
}

UserClassification classify_users(const std::vector<RetweetRecord>& records,
                                  const IdeologyTable& seeds) {
  if (seeds.party.empty()) {
    throw std::invalid_argument("classify_users: empty seed table");
  }
  struct Counts {
    long long d = 0;
    long long r = 0;
    long long total = 0;
  };
  std::map<std::string, Counts> counts;
  for (const auto& rec : records) {
    Counts& c = counts[rec.retweeter];
    ++c.total;
    const auto it = seeds.party.find(rec.author);
    if (it == seeds.party.end()) continue;
    if (it->second == 'D') {
      ++c.d;
    } else {
      ++c.r;
    }
  }
  UserClassification out;
  for (const auto& [user, c] : counts) {
    if (c.total < 2) {
      out[user] = Ideology::dropped_low_activity;
    } else if (c.d > c.r) {
      out[user] = Ideology::D;
    } else if (c.r > c.d) {
      out[user] = Ideology::R;
    } else {
      out[user] = Ideology::dropped_tie;
    }
  }
  return out;
}

PolarizationSeries polarization_series(const std::vector<RetweetRecord>& records,
                                       const UserClassification& classification,
                                       const IdeologyTable& seeds, int horizon) {
  if (horizon < 1) throw std::invalid_argument("polarization_series: horizon must be >= 1");
  PolarizationSeries series;
  series.y.assign(static_cast<std::size_t>(horizon), std::nullopt);
  series.intra.assign(static_cast<std::size_t>(horizon), 0);
  series.cross.assign(static_cast<std::size_t>(horizon), 0);

  for (const auto& rec : records) {
    if (rec.day < 1 || rec.day > horizon) continue;
    const auto user_it = classification.find(rec.retweeter);
    if (user_it == classification.end()) continue;
    if (user_it->second != Ideology::D && user_it->second != Ideology::R) continue;
    const auto seed_it = seeds.party.find(rec.author);
    if (seed_it == seeds.party.end()) continue;
    const char user_party = user_it->second == Ideology::D ? 'D' : 'R';
    const auto idx = static_cast<std::size_t>(rec.day - 1);
    if (user_party == seed_it->second) {
      ++series.intra[idx];
    } else {
      ++series.cross[idx];
    }
  }

  bool any = false;
  for (std::size_t d = 0; d < series.y.size(); ++d) {
    const long long total = series.intra[d] + series.cross[d];
    if (total > 0) {
      series.y[d] = static_cast<double>(series.intra[d]) / static_cast<double>(total);
      any = true;
    }
  }
  if (!any) {
    throw EmptySeriesError("polarization_series: no day has an eligible retweet");
  }
  return series;
}

DiscretizedSeries discretize_series(const PolarizationSeries& series, int n_states) {
  if (n_states < 2) throw std::invalid_argument("discretize_series: n_states must be >= 2");
  std::vector<double> observed;
  for (const auto& v : series.y) {
    if (v) observed.push_back(*v);
  }
  if (observed.size() < 2) {
    throw std::invalid_argument("discretize_series: need at least 2 non-gap days");
  }
  const auto [lo_it, hi_it] = std::minmax_element(observed.begin(), observed.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (hi - lo < 1e-12) {
    throw DegenerateRangeError("discretize_series: series is constant");
  }

  DiscretizedSeries out;
  out.lo = lo;
  out.hi = hi;
  out.n_states = n_states;
  out.observations.reserve(series.y.size());
  for (const auto& v : series.y) {
    if (v) {
      out.observations.push_back(out.to_canonical(*v));
    } else {
      out.observations.push_back(std::nullopt);
    }
  }
  const StateSpace space(n_states);
  for (const auto& v : out.observations) {
    if (v) {
      out.initial_index = space.nearest_index(*v);
      break;
    }
  }
  return out;
}

void write_series_csv(const PolarizationSeries& series, std::ostream& out) {
  out << "day,y,intra,cross,gap\n";
  char buf[40];
  for (std::size_t d = 0; d < series.y.size(); ++d) {
    out << (d + 1) << ',';
    if (series.y[d]) {
      std::snprintf(buf, sizeof(buf), "%.17g", *series.y[d]);
      out << buf;
    }
    out << ',' << series.intra[d] << ',' << series.cross[d] << ','
        << (series.y[d] ? 0 : 1) << "\n";
  }
}

}  // namespace bridgenet
