#include "moslim/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <sstream>

#include "moslim/rng.hpp"
#include "moslim/synthenv.hpp"
#include "moslim/util.hpp"

namespace moslim {

double PairingResult::mean_for(Dimension dim) const {
  switch (dim) {
    case Dimension::Helpfulness: return help_mean;
    case Dimension::Honesty: return honest_mean;
    case Dimension::Harmlessness: return harmless_mean;
  }
  return 0.0;
}

namespace {

struct OracleAggregate {
  double help = 0.0, honest = 0.0, harmless = 0.0;
  double help_sq = 0.0;
  int n = 0;
};

// Samples n responses under the given spec and accumulates oracle scores.
// Per-slot seeds keep the result independent of the worker count.
std::vector<OracleScore> collect_scores(const PolicyModel& policy, const PreferenceSpec& spec,
                                        int n_samples, std::uint64_t seed, const Vocabulary& vocab,
                                        const BenchConfig& cfg) {
  std::vector<OracleScore> scores(static_cast<std::size_t>(n_samples));
  parallel_for(scores.size(), cfg.workers, [&](std::size_t i) {
    const std::uint64_t slot_seed = derive_seed(seed, i);
    TaggedPrompt tp;
    tp.spec = spec;
    tp.body = render_body(sample_prompt_tokens(derive_seed(slot_seed, 1), cfg.prompt_length, vocab));
    const auto traj = policy.sample(tp, vocab, cfg.max_len, cfg.temperature, derive_seed(slot_seed, 2));
    scores[i] = oracle_score(traj.response, vocab);
  });
  return scores;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

SweepResult intensity_sweep(const PolicyModel& policy, Dimension dim, const DataTypeScheme& scheme,
                            int n_samples, std::uint64_t seed, const Vocabulary& vocab,
                            const BenchConfig& cfg) {
  const int levels = scheme.level_count(dim);
  if (levels < 2) {
    raise(ErrorCode::DegenerateDim, std::string(tag_name(dim)) + " has a single intensity level");
  }
  if (n_samples < 100) raise(ErrorCode::InvalidCount, "sweep rows need n_samples >= 100");
  SweepResult result;
  result.dim = dim;
  for (int n = 1; n <= levels; ++n) {
    PreferenceSpec spec;
    spec.set(dim, n);
    const auto scores =
        collect_scores(policy, spec, n_samples, derive_seed(seed, static_cast<std::uint64_t>(n)),
                       vocab, cfg);
    double mean = 0.0;
    for (const auto& s : scores) mean += s.raw(dim);
    mean /= static_cast<double>(scores.size());
    double var = 0.0;
    for (const auto& s : scores) var += (s.raw(dim) - mean) * (s.raw(dim) - mean);
    var /= static_cast<double>(scores.size());
    result.rows.push_back({n, mean, std::sqrt(var), n_samples});
  }
  return result;
}

std::vector<PairingResult> pairing_eval(const PolicyModel& policy, const DataTypeScheme& scheme,
                                        int n_samples, std::uint64_t seed, const Vocabulary& vocab,
                                        const BenchConfig& cfg) {
  if (n_samples < 100) raise(ErrorCode::InvalidCount, "pairing needs n_samples >= 100");
  std::vector<PairingResult> results;
  const std::array<std::pair<Dimension, Dimension>, 3> pairs = {
      std::pair{Dimension::Helpfulness, Dimension::Honesty},
      std::pair{Dimension::Helpfulness, Dimension::Harmlessness},
      std::pair{Dimension::Honesty, Dimension::Harmlessness}};
  int pair_index = 0;
  for (auto [a, b] : pairs) {
    PreferenceSpec spec;
    spec.set(a, scheme.level_count(a));
    spec.set(b, scheme.level_count(b));
    const auto scores = collect_scores(
        policy, spec, n_samples, derive_seed(seed, 0x50ULL + static_cast<std::uint64_t>(pair_index)),
        vocab, cfg);
    PairingResult result;
    result.dim_a = a;
    result.dim_b = b;
    for (const auto& s : scores) {
      result.help_mean += s.helpfulness;
      result.honest_mean += s.honesty;
      result.harmless_mean += s.harmlessness;
    }
    const auto n = static_cast<double>(scores.size());
    result.help_mean /= n;
    result.honest_mean /= n;
    result.harmless_mean /= n;
    results.push_back(result);
    ++pair_index;
  }
  return results;
}

std::string sweep_to_csv(const SweepResult& result) {
  std::string out = "dim,n,mean,std,n_samples\n";
  for (const auto& row : result.rows) {
    out += tag_name(result.dim);
    out += ',' + std::to_string(row.n) + ',' + format_double(row.mean) + ',' +
           format_double(row.stddev) + ',' + std::to_string(row.n_samples) + '\n';
  }
  return out;
}

std::string pairing_to_csv(const std::vector<PairingResult>& results) {
  std::string out = "dimA,dimB,help_mean,honest_mean,harmless_mean\n";
  for (const auto& r : results) {
    out += std::string(tag_name(r.dim_a)) + ',' + tag_name(r.dim_b) + ',' +
           format_double(r.help_mean) + ',' + format_double(r.honest_mean) + ',' +
           format_double(r.harmless_mean) + '\n';
  }
  return out;
}

namespace {

std::vector<std::vector<std::string>> parse_csv(const std::string& text, const std::string& header,
                                                std::size_t columns) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != header) {
    raise(ErrorCode::IoFailure, "unexpected CSV header: " + line);
  }
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t pos = 0;
    while (true) {
      const auto comma = line.find(',', pos);
      if (comma == std::string::npos) {
        fields.push_back(line.substr(pos));
        break;
      }
      fields.push_back(line.substr(pos, comma - pos));
      pos = comma + 1;
    }
    if (fields.size() != columns) raise(ErrorCode::IoFailure, "bad CSV row: " + line);
    rows.push_back(std::move(fields));
  }
  return rows;
}

Dimension dim_from_csv(const std::string& name) {
  const auto dim = dimension_from_tag_name(name);
  if (!dim) raise(ErrorCode::IoFailure, "unknown dimension in CSV: " + name);
  return *dim;
}

}  // namespace

SweepResult sweep_from_csv(const std::string& text) {
  const auto rows = parse_csv(text, "dim,n,mean,std,n_samples", 5);
  if (rows.empty()) raise(ErrorCode::IoFailure, "sweep CSV has no rows");
  SweepResult result;
  result.dim = dim_from_csv(rows[0][0]);
  for (const auto& fields : rows) {
    if (dim_from_csv(fields[0]) != result.dim) {
      raise(ErrorCode::IoFailure, "sweep CSV mixes dimensions");
    }
    result.rows.push_back({std::stoi(fields[1]), std::stod(fields[2]), std::stod(fields[3]),
                           std::stoi(fields[4])});
  }
  return result;
}

std::vector<PairingResult> pairing_from_csv(const std::string& text) {
  const auto rows = parse_csv(text, "dimA,dimB,help_mean,honest_mean,harmless_mean", 5);
  std::vector<PairingResult> results;
  for (const auto& fields : rows) {
    PairingResult r;
    r.dim_a = dim_from_csv(fields[0]);
    r.dim_b = dim_from_csv(fields[1]);
    r.help_mean = std::stod(fields[2]);
    r.honest_mean = std::stod(fields[3]);
    r.harmless_mean = std::stod(fields[4]);
    results.push_back(r);
  }
  return results;
}

// ---------------------------------------------------------------------------
// SVG rendering (no plotting dependency; output is deterministic)

namespace {

constexpr int kWidth = 480;
constexpr int kHeight = 320;
constexpr int kMargin = 48;

std::string svg_open() {
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  return out.str();
}

std::string text_el(double x, double y, const std::string& s, int size = 12,
                    const char* anchor = "middle") {
  std::ostringstream out;
  out << "<text x=\"" << format_double(x) << "\" y=\"" << format_double(y) << "\" font-size=\""
      << size << "\" text-anchor=\"" << anchor << "\" font-family=\"sans-serif\">" << s
      << "</text>\n";
  return out.str();
}

}  // namespace

std::string sweep_to_svg(const SweepResult& result) {
  double lo = 1e300, hi = -1e300;
  for (const auto& row : result.rows) {
    lo = std::min(lo, row.mean - row.stddev);
    hi = std::max(hi, row.mean + row.stddev);
  }
  if (lo > hi) {
    lo = 0.0;
    hi = 1.0;
  }
  if (hi - lo < 1e-9) hi = lo + 1.0;
  const int n_rows = static_cast<int>(result.rows.size());
  auto x_of = [&](int i) {
    return kMargin + (kWidth - 2.0 * kMargin) * (n_rows == 1 ? 0.5 : static_cast<double>(i) / (n_rows - 1));
  };
  auto y_of = [&](double v) {
    return kHeight - kMargin - (kHeight - 2.0 * kMargin) * (v - lo) / (hi - lo);
  };

  std::string svg = svg_open();
  std::ostringstream out;
  out << "<line x1=\"" << kMargin << "\" y1=\"" << kHeight - kMargin << "\" x2=\"" << kWidth - kMargin
      << "\" y2=\"" << kHeight - kMargin << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << kMargin << "\" y1=\"" << kMargin << "\" x2=\"" << kMargin << "\" y2=\""
      << kHeight - kMargin << "\" stroke=\"black\"/>\n";
  out << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
  for (int i = 0; i < n_rows; ++i) {
    out << format_double(x_of(i)) << ',' << format_double(y_of(result.rows[static_cast<std::size_t>(i)].mean)) << ' ';
  }
  out << "\"/>\n";
  for (int i = 0; i < n_rows; ++i) {
    const auto& row = result.rows[static_cast<std::size_t>(i)];
    out << "<line x1=\"" << format_double(x_of(i)) << "\" y1=\"" << format_double(y_of(row.mean - row.stddev))
        << "\" x2=\"" << format_double(x_of(i)) << "\" y2=\"" << format_double(y_of(row.mean + row.stddev))
        << "\" stroke=\"#1f77b4\" stroke-width=\"1\"/>\n";
    out << "<circle cx=\"" << format_double(x_of(i)) << "\" cy=\"" << format_double(y_of(row.mean))
        << "\" r=\"3\" fill=\"#1f77b4\"/>\n";
    out << text_el(x_of(i), kHeight - kMargin + 16, std::to_string(row.n));
  }
  out << text_el(kWidth / 2.0, kMargin / 2.0,
                 std::string("oracle score vs prompted intensity (") + tag_name(result.dim) + ")", 14);
  out << text_el(kMargin - 8, y_of(lo) + 4, format_double(lo), 10, "end");
  out << text_el(kMargin - 8, y_of(hi) + 4, format_double(hi), 10, "end");
  svg += out.str();
  svg += "</svg>\n";
  return svg;
}

std::string pairing_to_svg(const std::vector<PairingResult>& results) {
  // Radar chart: three axes (one per dimension), one polygon per pair.
  const double cx = kWidth / 2.0, cy = kHeight / 2.0 + 10.0;
  const double radius = (kHeight - 2.0 * kMargin) / 2.0;
  const std::array<const char*, 3> colors = {"#1f77b4", "#d62728", "#2ca02c"};
  double hi = 1e-9;
  for (const auto& r : results) {
    hi = std::max({hi, r.help_mean, r.honest_mean, r.harmless_mean});
  }
  auto point = [&](int axis, double v) {
    const double angle = -1.5707963267948966 + axis * 2.0943951023931953;  // start up, 120 deg apart
    const double rr = radius * v / hi;
    return std::pair{cx + rr * std::cos(angle), cy + rr * std::sin(angle)};
  };
  std::string svg = svg_open();
  std::ostringstream out;
  for (int axis = 0; axis < 3; ++axis) {
    const auto [x, y] = point(axis, hi);
    out << "<line x1=\"" << format_double(cx) << "\" y1=\"" << format_double(cy) << "\" x2=\""
        << format_double(x) << "\" y2=\"" << format_double(y) << "\" stroke=\"#999\"/>\n";
    const auto [lx, ly] = point(axis, hi * 1.12);
    out << text_el(lx, ly, tag_name(kAllDimensions[static_cast<std::size_t>(axis)]), 12);
  }
  int color_idx = 0;
  for (const auto& r : results) {
    std::ostringstream pts;
    const std::array<double, 3> values = {r.help_mean, r.honest_mean, r.harmless_mean};
    for (int axis = 0; axis < 3; ++axis) {
      const auto [x, y] = point(axis, values[static_cast<std::size_t>(axis)]);
      pts << format_double(x) << ',' << format_double(y) << ' ';
    }
    out << "<polygon fill=\"none\" stroke=\"" << colors[static_cast<std::size_t>(color_idx % 3)]
        << "\" stroke-width=\"2\" points=\"" << pts.str() << "\"/>\n";
    const auto label = std::string(tag_name(r.dim_a)) + "+" + tag_name(r.dim_b);
    out << text_el(kMargin + 60, kMargin / 2.0 + 14.0 * color_idx, label, 11, "start");
    out << "<line x1=\"" << kMargin << "\" y1=\"" << format_double(kMargin / 2.0 + 14.0 * color_idx - 4)
        << "\" x2=\"" << kMargin + 50 << "\" y2=\"" << format_double(kMargin / 2.0 + 14.0 * color_idx - 4)
        << "\" stroke=\"" << colors[static_cast<std::size_t>(color_idx % 3)] << "\" stroke-width=\"2\"/>\n";
    ++color_idx;
  }
  out << text_el(kWidth / 2.0, kHeight - 8, "oracle means under max-intensity pair prompts", 12);
  svg += out.str();
  svg += "</svg>\n";
  return svg;
}

ReportPaths report(const std::vector<SweepResult>& sweeps,
                   const std::vector<PairingResult>& pairings, const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) raise(ErrorCode::IoFailure, "cannot create " + out_dir);
  ReportPaths paths;
  for (const auto& sweep : sweeps) {
    const std::string base = out_dir + "/sweep_" + tag_name(sweep.dim);
    write_file(base + ".csv", sweep_to_csv(sweep));
    write_file(base + ".svg", sweep_to_svg(sweep));
    paths.files.push_back(base + ".csv");
    paths.files.push_back(base + ".svg");
  }
  if (!pairings.empty()) {
    const std::string base = out_dir + "/pairing";
    write_file(base + ".csv", pairing_to_csv(pairings));
    write_file(base + ".svg", pairing_to_svg(pairings));
    paths.files.push_back(base + ".csv");
    paths.files.push_back(base + ".svg");
  }
  return paths;
}

double spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) raise(ErrorCode::ShapeMismatch, "spearman inputs differ in length");
  const std::size_t n = xs.size();
  if (n < 2) raise(ErrorCode::InvalidArgument, "spearman needs at least 2 points");
  auto ranks = [](std::span<const double> values) {
    const std::size_t m = values.size();
    std::vector<std::size_t> idx(m);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return values[a] < values[b];
    });
    std::vector<double> rank(m);
    std::size_t i = 0;
    while (i < m) {
      std::size_t j = i;
      while (j + 1 < m && values[idx[j + 1]] == values[idx[i]]) ++j;
      const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
      for (std::size_t k = i; k <= j; ++k) rank[idx[k]] = avg;
      i = j + 1;
    }
    return rank;
  };
  const auto rx = ranks(xs);
  const auto ry = ranks(ys);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double cov = 0.0, vx = 0.0, vy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    cov += (rx[i] - mx) * (ry[i] - my);
    vx += (rx[i] - mx) * (rx[i] - mx);
    vy += (ry[i] - my) * (ry[i] - my);
  }
  if (vx <= 0.0 || vy <= 0.0) return 0.0;
  return cov / std::sqrt(vx * vy);
}

}  // namespace moslim
