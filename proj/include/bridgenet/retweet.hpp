#ifndef BRIDGENET_RETWEET_HPP
#define BRIDGENET_RETWEET_HPP

#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "bridgenet/state_space.hpp"

namespace bridgenet {

/// One retweet event. Days are rebased to the ingestion window, so day 1 is
/// the window's first day.
struct RetweetRecord {
  int day = 0;
  std::string retweeter;
  std::string author;
};

struct ParseReport {
  std::vector<RetweetRecord> records;
  std::vector<int> malformed_lines;  // 1-based line numbers in the input file
  long long data_lines = 0;          // non-comment, non-blank lines seen
};

/// Parse `day<TAB>retweeter<TAB>author` lines; '#' starts a comment. Lines
/// outside [day_min, day_max] are dropped silently; malformed lines are
/// collected, and more than 1% of them raises FormatError.
ParseReport parse_retweets(const std::filesystem::path& path, int day_min, int day_max);

/// Keep positions 0, n, 2n, ... in file order.
std::vector<RetweetRecord> systematic_subsample(const std::vector<RetweetRecord>& records, int n);

/// Seed account -> party ('D' or 'R').
struct IdeologyTable {
  std::map<std::string, char> party;
};

/// CSV `account,party`; a header line `account,party` is allowed.
IdeologyTable read_seed_table(const std::filesystem::path& path);

enum class Ideology { D, R, dropped_tie, dropped_low_activity };

using UserClassification = std::map<std::string, Ideology>;

/// Majority rule over seed retweets: more D-seed retweets than R-seed means
/// D and symmetrically; equal counts are dropped as ties; users with fewer
/// than 2 retweets in total (any author) are dropped as low-activity.
UserClassification classify_users(const std::vector<RetweetRecord>& records,
                                  const IdeologyTable& seeds);

/// Daily polarization score: intra-ideology fraction of classified users'
/// retweets of seed accounts. Days with no eligible retweet are gaps.
struct PolarizationSeries {
  std::vector<std::optional<double>> y;
  std::vector<long long> intra;
  std::vector<long long> cross;
};

PolarizationSeries polarization_series(const std::vector<RetweetRecord>& records,
                                       const UserClassification& classification,
                                       const IdeologyTable& seeds, int horizon);

/// The series mapped onto the canonical [0,1] grid: u = (y - lo)/(hi - lo)
/// with [lo, hi] the observed range, so the bridge/filter machinery applies
/// unchanged. The final pin is the maximal state; the initial state is the
/// grid point nearest the first observed value.
struct DiscretizedSeries {
  std::vector<std::optional<double>> observations;
  double lo = 0.0;
  double hi = 1.0;
  int n_states = 2;
  int initial_index = 0;

  double to_canonical(double y) const { return (y - lo) / (hi - lo); }
  double from_canonical(double u) const { return lo + u * (hi - lo); }
};

DiscretizedSeries discretize_series(const PolarizationSeries& series, int n_states);

/// CSV: day,y,intra,cross,gap.
void write_series_csv(const PolarizationSeries& series, std::ostream& out);

}  // namespace bridgenet

#endif
