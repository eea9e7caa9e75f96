#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mvsteg/calibration.hpp"
#include "mvsteg/codec.hpp"
#include "mvsteg/error.hpp"
#include "mvsteg/evaluation.hpp"
#include "mvsteg/features.hpp"
#include "mvsteg/parallel.hpp"
#include "mvsteg/random.hpp"
#include "mvsteg/stego.hpp"
#include "mvsteg/yuv_io.hpp"

namespace mvsteg {

struct corpus_spec {
  int count = 20;
  int width = 352;
  int height = 288;
  int frames = 61;
  std::vector<motion_model> models{motion_model::multi_object};
  std::uint64_t seed = 1;
  int noise = 0;
  // Per-sequence background pan is drawn from [-pan_max, pan_max] pels per
  // axis, plus [-subpel_max, subpel_max] sixteenths.
  int pan_max = 2;
  int subpel_max = 0;
  int objects = 60;
  int object_min = 16;
  int object_max = 64;
  int object_speed16 = 64;
  int velocity_step16 = 16;
};

struct experiment_config {
  corpus_spec corpus;
  std::vector<int> qps{25};
  std::vector<double> rates{0.0, 0.2};
  embedding_method method = embedding_method::lsb_match_random;
  std::uint64_t embed_seed = 2;
  int gop_size = 6;
  int search_range = default_search_range;
  search_strategy strategy = search_strategy::hexagon;
  int window = default_window_length;
  window_mode mode = window_mode::non_overlapping;
  // Extra calibration QPs for mismatch runs; matched calibration always runs.
  std::vector<int> qp_overrides;
  int repeats = 10;
  double train_fraction = 0.6;
  int folds = 5;
  std::uint64_t eval_seed = 3;
  int workers = 0;  // 0 means one per hardware thread
  std::string out = "experiment_out";
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto end = comma == std::string_view::npos ? s.size() : comma;
    auto item = trim(s.substr(start, end - start));
    if (!item.empty()) out.push_back(std::move(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if constexpr (std::is_floating_point_v<T>) {
    char* end = nullptr;
    v = std::strtod(first, &end);
    if (text.empty() || end != last || !std::isfinite(v)) throw invalid_argument(key + ": not a number: '" + text + "'");
  } else {
    const auto [p, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || p != last) throw invalid_argument(key + ": not an integer: '" + text + "'");
  }
  return v;
}

template <typename T>
std::vector<T> parse_numbers(const std::string& key, const std::string& text) {
  std::vector<T> out;
  for (const auto& item : split_list(text)) out.push_back(parse_number<T>(key, item));
  return out;
}

inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string short_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace detail

inline void validate(const experiment_config& c) {
  const auto& k = c.corpus;
  if (k.count < 1) throw invalid_argument("corpus.count must be at least 1");
  if (k.width <= 0 || k.height <= 0 || k.width % mb_size || k.height % mb_size)
    throw dimension_not_aligned("corpus dimensions must be positive multiples of 16");
  if (k.frames < 2) throw invalid_argument("corpus.frames must be at least 2");
  if (k.models.empty()) throw invalid_argument("corpus.models must not be empty");
  if (k.noise < 0 || k.pan_max < 0 || k.subpel_max < 0 || k.subpel_max > 15)
    throw invalid_argument("corpus noise/pan/subpel out of range");
  if (k.objects < 3 || k.object_min < 1 || k.object_max < k.object_min || k.object_speed16 < 1 || k.velocity_step16 < 1)
    throw invalid_argument("corpus object parameters out of range");
  if (c.qps.empty()) throw invalid_argument("qp list must not be empty");
  for (int qp : c.qps) detail::check_qp(qp);
  for (int qp : c.qp_overrides) detail::check_qp(qp);
  if (c.rates.empty()) throw invalid_argument("rate list must not be empty");
  for (double r : c.rates)
    if (!(r >= 0 && r <= 1)) throw invalid_argument("rates must lie in [0,1]");
  if (c.gop_size < 1 || c.gop_size > 255) throw invalid_argument("gop must be in [1,255]");
  if (c.search_range < 0) throw invalid_argument("search_range must be non-negative");
  if (c.window < 1) throw invalid_argument("window must be at least 1");
  if (c.repeats < 1 || c.folds < 2) throw invalid_argument("repeats must be >= 1 and folds >= 2");
  if (!(c.train_fraction > 0 && c.train_fraction < 1)) throw invalid_argument("train_fraction must be in (0,1)");
  if (c.workers < 0) throw invalid_argument("workers must be non-negative");
}

// Parses "key = value" lines; '#' starts a comment. Unknown keys are errors.
inline experiment_config parse_experiment_config(std::istream& is) {
  experiment_config c;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto t = detail::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
    const auto key = detail::trim(std::string_view(t).substr(0, eq));
    const auto val = detail::trim(std::string_view(t).substr(eq + 1));
    using detail::parse_number;
    using detail::parse_numbers;
    auto& k = c.corpus;
    if (key == "corpus.count") k.count = parse_number<int>(key, val);
    else if (key == "corpus.width") k.width = parse_number<int>(key, val);
    else if (key == "corpus.height") k.height = parse_number<int>(key, val);
    else if (key == "corpus.frames") k.frames = parse_number<int>(key, val);
    else if (key == "corpus.seed") k.seed = parse_number<std::uint64_t>(key, val);
    else if (key == "corpus.noise") k.noise = parse_number<int>(key, val);
    else if (key == "corpus.pan_max") k.pan_max = parse_number<int>(key, val);
    else if (key == "corpus.subpel_max") k.subpel_max = parse_number<int>(key, val);
    else if (key == "corpus.objects") k.objects = parse_number<int>(key, val);
    else if (key == "corpus.object_min") k.object_min = parse_number<int>(key, val);
    else if (key == "corpus.object_max") k.object_max = parse_number<int>(key, val);
    else if (key == "corpus.object_speed16") k.object_speed16 = parse_number<int>(key, val);
    else if (key == "corpus.velocity_step16") k.velocity_step16 = parse_number<int>(key, val);
    else if (key == "corpus.models") {
      k.models.clear();
      for (const auto& m : detail::split_list(val)) {
        const auto parsed = parse_motion_model(m);
        if (!parsed) throw invalid_argument("unknown motion model '" + m + "'");
        k.models.push_back(*parsed);
      }
    } else if (key == "qp") c.qps = parse_numbers<int>(key, val);
    else if (key == "rates") c.rates = parse_numbers<double>(key, val);
    else if (key == "method") {
      const auto m = parse_embedding_method(val);
      if (!m) throw invalid_argument("unknown embedding method '" + val + "'");
      c.method = *m;
    } else if (key == "embed_seed") c.embed_seed = parse_number<std::uint64_t>(key, val);
    else if (key == "gop") c.gop_size = parse_number<int>(key, val);
    else if (key == "search_range") c.search_range = parse_number<int>(key, val);
    else if (key == "strategy") {
      const auto s = parse_search_strategy(val);
      if (!s) throw invalid_argument("unknown search strategy '" + val + "'");
      c.strategy = *s;
    } else if (key == "window") c.window = parse_number<int>(key, val);
    else if (key == "mode") {
      const auto m = parse_window_mode(val);
      if (!m) throw invalid_argument("unknown window mode '" + val + "'");
      c.mode = *m;
    } else if (key == "qp_override") c.qp_overrides = parse_numbers<int>(key, val);
    else if (key == "repeats") c.repeats = parse_number<int>(key, val);
    else if (key == "train_fraction") c.train_fraction = parse_number<double>(key, val);
    else if (key == "folds") c.folds = parse_number<int>(key, val);
    else if (key == "eval_seed") c.eval_seed = parse_number<std::uint64_t>(key, val);
    else if (key == "workers") c.workers = parse_number<int>(key, val);
    else if (key == "out") c.out = val;
    else throw invalid_argument("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
  }
  validate(c);
  return c;
}

inline experiment_config load_experiment_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw io_error("cannot open config " + path.string());
  return parse_experiment_config(is);
}

// Generator parameters and seed of corpus sequence i.
struct corpus_item {
  std::string id;
  synthetic_params params;
  std::uint64_t seed = 0;
};

inline corpus_item corpus_entry(const corpus_spec& spec, int i) {
  rng gen(derive_seed(spec.seed, 2 * static_cast<std::uint64_t>(i)));
  corpus_item item;
  char id[32];
  std::snprintf(id, sizeof id, "seq%03d", i);
  item.id = id;
  auto& p = item.params;
  p.model = spec.models[static_cast<std::size_t>(i) % spec.models.size()];
  p.pan_h = gen.between(-spec.pan_max, spec.pan_max);
  p.pan_v = gen.between(-spec.pan_max, spec.pan_max);
  p.subpel_h = gen.between(-spec.subpel_max, spec.subpel_max);
  p.subpel_v = gen.between(-spec.subpel_max, spec.subpel_max);
  p.noise_amplitude = spec.noise;
  p.object_count = spec.objects;
  p.min_object_size = spec.object_min;
  p.max_object_size = spec.object_max;
  p.max_object_speed16 = spec.object_speed16;
  p.velocity_step16 = spec.velocity_step16;
  item.seed = derive_seed(spec.seed, 2 * static_cast<std::uint64_t>(i) + 1);
  return item;
}

inline video_sequence generate_corpus_video(const corpus_spec& spec, int i) {
  const auto item = corpus_entry(spec, i);
  return generate_synthetic(spec.width, spec.height, spec.frames, item.params, item.seed);
}

inline encoder_config encoder_for(const experiment_config& c, int qp) {
  encoder_config e;
  e.qp = qp;
  e.gop_size = c.gop_size;
  e.search_range = c.search_range;
  e.strategy = c.strategy;
  return e;
}

inline embedding_plan plan_for(const experiment_config& c, double rate, int sequence) {
  return {c.method, rate, derive_seed(c.embed_seed, static_cast<std::uint64_t>(sequence))};
}

// One (qp, rate, calibration qp) cell of the experiment matrix.
struct experiment_cell {
  int qp = 0;
  double rate = 0;
  int calibration_qp = 0;
  std::vector<feature_row> rows;  // sequence-major, cover windows then stego windows
  accuracy_report report;

  bool matched() const { return qp == calibration_qp; }
};

struct sequence_stats {
  std::string id;
  int qp = 0;
  double skip_fraction = 0;
  double retained_skip_fraction = 0;  // NaN when the cover has no PSkip blocks
};

struct experiment_result {
  std::vector<experiment_cell> cells;
  std::vector<sequence_stats> skip_stats;
};

inline std::vector<int> calibration_qps(const experiment_config& c, int qp) {
  std::vector<int> out{qp};
  for (int o : c.qp_overrides)
    if (std::find(out.begin(), out.end(), o) == out.end()) out.push_back(o);
  return out;
}

inline std::vector<feature_row> feature_rows(const calibrated_sequence& cal, const experiment_config& c,
                                             const std::string& id, label lbl) {
  std::vector<feature_row> rows;
  for (const auto& f : extract_smcf(cal, c.window, c.mode)) rows.push_back({id, lbl, f});
  return rows;
}

// Runs the whole matrix. Sequences are processed concurrently; every result
// lands in a per-sequence slot, so output never depends on scheduling.
inline experiment_result run_experiment(const experiment_config& c) {
  validate(c);
  const int workers = c.workers > 0 ? c.workers : default_workers();
  const recompression_settings rs{c.search_range, c.strategy};

  struct cell_key {
    int qp;
    std::size_t rate_index;
    int cal_qp;
  };
  std::vector<cell_key> keys;
  for (int qp : c.qps)
    for (std::size_t r = 0; r < c.rates.size(); ++r)
      for (int cq : calibration_qps(c, qp)) keys.push_back({qp, r, cq});

  const auto n = static_cast<std::size_t>(c.corpus.count);
  // rows_by_seq[s][k] holds sequence s's rows for cell k.
  std::vector<std::vector<std::vector<feature_row>>> rows_by_seq(n, std::vector<std::vector<feature_row>>(keys.size()));
  std::vector<std::vector<sequence_stats>> stats_by_seq(n);

  parallel_for(n, workers, [&](std::size_t s) {
    const int si = static_cast<int>(s);
    const auto id = corpus_entry(c.corpus, si).id;
    const auto video = generate_corpus_video(c.corpus, si);
    for (int qp : c.qps) {
      const auto cfg = encoder_for(c, qp);
      const auto cover = encode_sequence(video, cfg);
      std::map<int, calibrated_sequence> cover_cal;
      for (int cq : calibration_qps(c, qp)) cover_cal[cq] = calibrate(cover, cq, rs);
      sequence_stats st{id, qp, skip_fraction(cover), std::nan("")};
      try {
        st.retained_skip_fraction = retained_skip_fraction(cover_cal.at(qp));
      } catch (const no_skip_blocks&) {
      }
      stats_by_seq[s].push_back(st);
      for (std::size_t r = 0; r < c.rates.size(); ++r) {
        const auto stego = embed_sequence(video, cfg, plan_for(c, c.rates[r], si));
        for (std::size_t k = 0; k < keys.size(); ++k) {
          if (keys[k].qp != qp || keys[k].rate_index != r) continue;
          auto rows = feature_rows(cover_cal.at(keys[k].cal_qp), c, id, label::cover);
          auto srows = feature_rows(calibrate(stego, keys[k].cal_qp, rs), c, id, label::stego);
          rows.insert(rows.end(), srows.begin(), srows.end());
          rows_by_seq[s][k] = std::move(rows);
        }
      }
    }
  });

  experiment_result result;
  for (std::size_t k = 0; k < keys.size(); ++k) {
    experiment_cell cell{keys[k].qp, c.rates[keys[k].rate_index], keys[k].cal_qp, {}, {}};
    for (std::size_t s = 0; s < n; ++s)
      cell.rows.insert(cell.rows.end(), rows_by_seq[s][k].begin(), rows_by_seq[s][k].end());
    evaluation_options opt;
    opt.repeats = c.repeats;
    opt.train_fraction = c.train_fraction;
    opt.folds = c.folds;
    opt.seed = c.eval_seed;
    opt.workers = workers;
    cell.report = evaluate(samples_from_rows(cell.rows), opt);
    result.cells.push_back(std::move(cell));
  }
  for (auto& v : stats_by_seq) result.skip_stats.insert(result.skip_stats.end(), v.begin(), v.end());
  return result;
}

// Per-feature mean and sample standard deviation of one label's rows.
struct feature_summary {
  feature_array mean{};
  feature_array stddev{};
  std::size_t count = 0;
};

inline feature_summary summarize(std::span<const feature_row> rows, label lbl) {
  feature_summary s;
  for (const auto& r : rows) {
    if (r.lbl != lbl) continue;
    ++s.count;
    for (std::size_t i = 0; i < feature_dims; ++i) s.mean[i] += r.features.f[i];
  }
  if (s.count == 0) return s;
  for (auto& m : s.mean) m /= static_cast<double>(s.count);
  if (s.count > 1) {
    for (const auto& r : rows) {
      if (r.lbl != lbl) continue;
      for (std::size_t i = 0; i < feature_dims; ++i) {
        const double d = r.features.f[i] - s.mean[i];
        s.stddev[i] += d * d;
      }
    }
    for (auto& v : s.stddev) v = std::sqrt(v / static_cast<double>(s.count - 1));
  }
  return s;
}

inline std::string cell_tag(const experiment_cell& cell) {
  return "qp" + std::to_string(cell.qp) + "_rate" + detail::short_real(cell.rate) + "_cal" +
         std::to_string(cell.calibration_qp);
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os || !(os << text) || !os.flush()) throw io_error("cannot write " + path.string());
}

// Writes every report under c.out:
//   accuracy.csv         long form, one line per cell
//   accuracy_matrix.csv  rows = (calibration, qp), columns = rates
//   feature_stats.csv    per-feature mean/std by cell and label
//   skip_stats.csv       per-sequence cover skip statistics
//   features/<cell>.csv  feature rows
//   reports/<cell>.csv   per-repeat accuracies
inline void write_experiment_reports(const experiment_config& c, const experiment_result& res) {
  namespace fs = std::filesystem;
  const fs::path out(c.out);
  std::error_code ec;
  fs::create_directories(out / "features", ec);
  fs::create_directories(out / "reports", ec);
  if (ec) throw io_error("cannot create output directory " + out.string() + ": " + ec.message());

  std::ostringstream acc, matrix, stats, skip;
  acc << "qp,rate,calibration_qp,mean_accuracy,std_accuracy,repeats\n";
  stats << "qp,rate,calibration_qp,label,feature,mean,std,windows\n";
  for (const auto& cell : res.cells) {
    acc << cell.qp << ',' << detail::format_real(cell.rate) << ',' << cell.calibration_qp << ','
        << detail::format_real(cell.report.mean) << ',' << detail::format_real(cell.report.stddev) << ','
        << cell.report.repeats.size() << '\n';
    for (label l : {label::cover, label::stego}) {
      const auto s = summarize(cell.rows, l);
      for (std::size_t i = 0; i < feature_dims; ++i) {
        stats << cell.qp << ',' << detail::format_real(cell.rate) << ',' << cell.calibration_qp << ',' << to_string(l)
              << ",f" << i << ',' << detail::format_real(s.mean[i]) << ',' << detail::format_real(s.stddev[i]) << ','
              << s.count << '\n';
      }
    }
    std::ostringstream fr, rp;
    write_feature_csv(fr, cell.rows);
    write_report_csv(rp, cell.report);
    write_text(out / "features" / (cell_tag(cell) + ".csv"), fr.str());
    write_text(out / "reports" / (cell_tag(cell) + ".csv"), rp.str());
  }

  matrix << "calibration,qp";
  for (double r : c.rates) matrix << ",rate=" << detail::short_real(r);
  matrix << '\n';
  std::vector<std::pair<std::string, int>> row_keys;
  for (int qp : c.qps)
    for (int cq : calibration_qps(c, qp)) {
      std::pair<std::string, int> key{cq == qp ? "matched" : "qp=" + std::to_string(cq), qp};
      if (std::find(row_keys.begin(), row_keys.end(), key) == row_keys.end()) row_keys.push_back(key);
    }
  for (const auto& [cal, qp] : row_keys) {
    matrix << cal << ',' << qp;
    for (double r : c.rates) {
      for (const auto& cell : res.cells) {
        const bool same_cal = cal == "matched" ? cell.matched() : "qp=" + std::to_string(cell.calibration_qp) == cal;
        if (cell.qp == qp && cell.rate == r && same_cal) matrix << ',' << detail::format_real(cell.report.mean);
      }
    }
    matrix << '\n';
  }

  skip << "sequence_id,qp,skip_fraction,retained_skip_fraction\n";
  for (const auto& s : res.skip_stats)
    skip << s.id << ',' << s.qp << ',' << detail::format_real(s.skip_fraction) << ','
         << detail::format_real(s.retained_skip_fraction) << '\n';

  write_text(out / "accuracy.csv", acc.str());
  write_text(out / "accuracy_matrix.csv", matrix.str());
  write_text(out / "feature_stats.csv", stats.str());
  write_text(out / "skip_stats.csv", skip.str());
}

}  // namespace mvsteg
