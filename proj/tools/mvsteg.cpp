#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "mvsteg.hpp"

namespace fs = std::filesystem;
using namespace mvsteg;

namespace {

struct global_options {
  std::uint64_t seed = 0;
  int workers = 0;
  std::string out;
};

struct codec_options {
  int qp = 25;
  int gop = 6;
  int search_range = default_search_range;
  std::string strategy = "hexagon";
};

void add_codec_options(CLI::App* cmd, codec_options& o) {
  cmd->add_option("--qp", o.qp, "Quantization parameter")->capture_default_str();
  cmd->add_option("--gop", o.gop, "GOP size (I-frame period)")->capture_default_str();
  cmd->add_option("--search-range", o.search_range, "Motion search range in pels")->capture_default_str();
  cmd->add_option("--strategy", o.strategy, "Motion search: full or hexagon")->capture_default_str();
}

search_strategy strategy_of(const std::string& s) {
  const auto v = parse_search_strategy(s);
  if (!v) throw invalid_argument("unknown search strategy '" + s + "'");
  return *v;
}

encoder_config encoder_of(const codec_options& o, std::uint64_t seed) {
  return {o.qp, o.gop, o.search_range, strategy_of(o.strategy), seed};
}

const std::string& require_out(const global_options& g) {
  if (g.out.empty()) throw invalid_argument("--out is required");
  return g.out;
}

void write_string(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os || !(os << text) || !os.flush()) throw io_error("cannot write " + path.string());
}

encoded_stream read_stream(const std::string& path) {
  const auto bytes = read_file(path);
  return deserialize(bytes);
}

std::vector<feature_row> read_rows(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw io_error("cannot open " + path);
  return read_feature_csv(is);
}

std::string calibration_csv(const calibrated_sequence& cal) {
  std::ostringstream os;
  os << "frame_index,mb_row,mb_col,qp_first,qp_second,first_partition,first_mvp_h,first_mvp_v,"
        "second_partition,second_mvp_h,second_mvp_v\n";
  for (const auto& p : cal.pairs) {
    os << p.frame_index << ',' << p.mb_row << ',' << p.mb_col << ',' << cal.qp_first << ',' << cal.qp_second << ','
       << to_string(p.first.partition) << ',' << p.first.mvp.h << ',' << p.first.mvp.v << ','
       << to_string(p.second.partition) << ',' << p.second.mvp.h << ',' << p.second.mvp.v << '\n';
  }
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Motion-vector steganography and skip-macroblock steganalysis toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  global_options g;
  app.add_option("--seed", g.seed, "Seed for the step's randomness (generator, embedder, splits)");
  app.add_option("--workers", g.workers, "Worker threads (0 = hardware concurrency)");
  app.add_option("--out", g.out, "Output file, or directory for experiment");

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a synthetic YUV 4:2:0 sequence");
  int gen_w = 176, gen_h = 144, gen_frames = 31;
  std::string gen_model = "global-pan";
  std::vector<int> gen_pan{1, 0}, gen_subpel{0, 0};
  std::optional<int> gen_noise;
  synthetic_params gen_defaults;
  int gen_objects = gen_defaults.object_count, gen_speed = gen_defaults.max_object_speed16,
      gen_step = gen_defaults.velocity_step16;
  std::optional<int> gen_min_size, gen_max_size;
  gen->add_option("--width", gen_w)->capture_default_str();
  gen->add_option("--height", gen_h)->capture_default_str();
  gen->add_option("--frames", gen_frames)->capture_default_str();
  gen->add_option("--model", gen_model, "global-pan, multi-object or static+noise")->capture_default_str();
  gen->add_option("--pan", gen_pan, "Per-frame pan in pels: H V")->expected(2)->capture_default_str();
  gen->add_option("--subpel", gen_subpel, "Extra pan in sixteenths of a pel: H V")->expected(2)->capture_default_str();
  gen->add_option("--noise", gen_noise, "Noise amplitude");
  gen->add_option("--objects", gen_objects)->capture_default_str();
  gen->add_option("--object-speed16", gen_speed, "Max object speed in sixteenths per frame")->capture_default_str();
  gen->add_option("--velocity-step16", gen_step, "Object velocity quantum in sixteenths")->capture_default_str();
  gen->add_option("--object-min", gen_min_size, "Smallest object side in pels");
  gen->add_option("--object-max", gen_max_size, "Largest object side in pels");

  // encode
  auto* enc = app.add_subcommand("encode", "Encode a YUV file into an MVSL stream");
  std::string in_path;
  int in_w = 0, in_h = 0;
  bool pad = false;
  codec_options codec;
  enc->add_option("input", in_path, "Input .yuv")->required();
  enc->add_option("--width", in_w)->required();
  enc->add_option("--height", in_h)->required();
  enc->add_flag("--pad", pad, "Edge-replicate to whole macroblocks instead of rejecting");
  add_codec_options(enc, codec);

  // decode
  auto* dec = app.add_subcommand("decode", "Decode an MVSL stream to YUV");
  std::string restream;
  dec->add_option("input", in_path, "Input stream")->required();
  dec->add_option("--restream", restream, "Also re-serialize the parsed stream to this path");

  // embed
  auto* emb = app.add_subcommand("embed", "Encode a YUV file with in-loop motion-vector embedding");
  std::string method = "lsb-match-random";
  double rate = 0.2;
  emb->add_option("input", in_path, "Input .yuv")->required();
  emb->add_option("--width", in_w)->required();
  emb->add_option("--height", in_h)->required();
  emb->add_flag("--pad", pad, "Edge-replicate to whole macroblocks instead of rejecting");
  emb->add_option("--method", method, "lsb-match-random or magnitude-selective")->capture_default_str();
  emb->add_option("--rate", rate, "Bits per non-skip motion vector")->capture_default_str();
  add_codec_options(emb, codec);

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "Recompress a stream and write aligned macroblock pairs as CSV");
  std::optional<int> qp_override;
  std::string recompressed;
  recompression_settings rs;
  std::string rs_strategy = "hexagon";
  cal->add_option("input", in_path, "Input stream")->required();
  cal->add_option("--qp-override", qp_override, "Recompression QP (default: the stream's)");
  cal->add_option("--search-range", rs.search_range, "Recompression search range")->capture_default_str();
  cal->add_option("--strategy", rs_strategy, "Recompression motion search")->capture_default_str();
  cal->add_option("--recompressed", recompressed, "Also write the recompressed stream here");

  // features
  auto* feat = app.add_subcommand("features", "Extract calibrated skip features as CSV");
  int window = default_window_length;
  std::string mode = "non-overlapping", lbl = "cover", seq_id;
  feat->add_option("input", in_path, "Input stream")->required();
  feat->add_option("--qp-override", qp_override, "Recompression QP (default: the stream's)");
  feat->add_option("--search-range", rs.search_range, "Recompression search range")->capture_default_str();
  feat->add_option("--strategy", rs_strategy, "Recompression motion search")->capture_default_str();
  feat->add_option("--window", window, "P-frames per window")->capture_default_str();
  feat->add_option("--mode", mode, "non-overlapping or sliding")->capture_default_str();
  feat->add_option("--label", lbl, "cover or stego")->capture_default_str();
  feat->add_option("--id", seq_id, "Sequence id (default: input file stem)");

  // train
  auto* trn = app.add_subcommand("train", "Train the Gaussian-kernel SVM on a feature CSV");
  std::vector<std::string> csv_inputs;
  std::optional<double> c_value, gamma_value;
  int folds = 5;
  trn->add_option("input", csv_inputs, "Feature CSV files")->required();
  trn->add_option("--c", c_value, "Penalty (skip cross-validation when given with --gamma)");
  trn->add_option("--gamma", gamma_value, "Kernel factor");
  trn->add_option("--folds", folds)->capture_default_str();

  // eval
  auto* ev = app.add_subcommand("eval", "Repeated pair-split evaluation of a feature CSV");
  int repeats = 10;
  double train_fraction = 0.6;
  ev->add_option("input", csv_inputs, "Feature CSV files")->required();
  ev->add_option("--repeats", repeats)->capture_default_str();
  ev->add_option("--train-fraction", train_fraction)->capture_default_str();
  ev->add_option("--folds", folds)->capture_default_str();

  // experiment
  auto* exp = app.add_subcommand("experiment", "Run the full cover/stego experiment matrix from a config file");
  std::string config_path;
  exp->add_option("config", config_path, "Experiment config (key = value)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  const char* step = app.get_subcommands().front()->get_name().c_str();
  try {
    if (*gen) {
      const auto model = parse_motion_model(gen_model);
      if (!model) throw invalid_argument("unknown motion model '" + gen_model + "'");
      synthetic_params p;
      p.model = *model;
      p.pan_h = gen_pan[0];
      p.pan_v = gen_pan[1];
      p.subpel_h = gen_subpel[0];
      p.subpel_v = gen_subpel[1];
      p.noise_amplitude = gen_noise;
      p.object_count = gen_objects;
      p.max_object_speed16 = gen_speed;
      p.velocity_step16 = gen_step;
      p.min_object_size = gen_min_size;
      p.max_object_size = gen_max_size;
      write_yuv(require_out(g), generate_synthetic(gen_w, gen_h, gen_frames, p, g.seed));
    } else if (*enc || *emb) {
      const auto& out = require_out(g);
      const auto video = read_yuv(in_path, in_w, in_h, pad ? padding::replicate : padding::reject);
      const auto cfg = encoder_of(codec, g.seed);
      encoded_stream s;
      if (*enc) {
        s = encode_sequence(video, cfg);
      } else {
        const auto m = parse_embedding_method(method);
        if (!m) throw invalid_argument("unknown embedding method '" + method + "'");
        s = embed_sequence(video, cfg, {*m, rate, g.seed});
      }
      write_file(out, serialize(s));
      std::printf("frames %u  skip fraction %.4f\n", s.header.n_frames, skip_fraction(s));
    } else if (*dec) {
      const auto bytes = read_file(in_path);
      const auto s = deserialize(bytes);
      write_yuv(require_out(g), decode_sequence(s).video);
      if (!restream.empty()) write_file(restream, serialize(s));
    } else if (*cal) {
      rs.strategy = strategy_of(rs_strategy);
      const auto res = calibrate_detailed(read_stream(in_path), qp_override, rs);
      write_string(require_out(g), calibration_csv(res.sequence));
      if (!recompressed.empty()) write_file(recompressed, serialize(res.recompressed));
      std::printf("pairs %zu  qp_first %d  qp_second %d\n", res.sequence.pairs.size(), res.sequence.qp_first,
                  res.sequence.qp_second);
    } else if (*feat) {
      rs.strategy = strategy_of(rs_strategy);
      const auto wm = parse_window_mode(mode);
      if (!wm) throw invalid_argument("unknown window mode '" + mode + "'");
      if (lbl != "cover" && lbl != "stego") throw invalid_argument("label must be cover or stego");
      const auto id = seq_id.empty() ? fs::path(in_path).stem().string() : seq_id;
      if (id.find(',') != std::string::npos) throw invalid_argument("sequence id must not contain commas");
      std::vector<feature_row> rows;
      for (const auto& f : extract_smcf(calibrate(read_stream(in_path), qp_override, rs), window, *wm))
        rows.push_back({id, lbl == "cover" ? label::cover : label::stego, f});
      std::ostringstream os;
      write_feature_csv(os, rows);
      write_string(require_out(g), os.str());
    } else if (*trn || *ev) {
      std::vector<feature_row> rows;
      for (const auto& path : csv_inputs) {
        auto r = read_rows(path);
        rows.insert(rows.end(), r.begin(), r.end());
      }
      const auto samples = samples_from_rows(rows);
      const int workers = g.workers > 0 ? g.workers : default_workers();
      if (*trn) {
        double c, gamma;
        if (c_value && gamma_value) {
          c = *c_value;
          gamma = *gamma_value;
        } else if (c_value || gamma_value) {
          throw invalid_argument("give both --c and --gamma, or neither");
        } else {
          const auto grid = hyper_grid::defaults();
          const auto best = cross_validate(samples, grid.c, grid.gamma, folds, g.seed, workers);
          c = best.c;
          gamma = best.gamma;
          std::printf("cross-validation accuracy %.4f\n", best.accuracy);
        }
        if (!(c > 0) || !(gamma > 0)) throw invalid_argument("c and gamma must be positive");
        const auto model = train(samples, c, gamma);
        write_file(require_out(g), serialize_model(model));
        std::printf("c %g  gamma %g  support vectors %zu  training accuracy %.4f\n", c, gamma,
                    model.support_vectors.size(), accuracy(model, samples));
      } else {
        evaluation_options opt;
        opt.repeats = repeats;
        opt.train_fraction = train_fraction;
        opt.folds = folds;
        opt.seed = g.seed;
        opt.workers = workers;
        const auto report = evaluate(samples, opt);
        std::ostringstream os;
        write_report_csv(os, report);
        write_string(require_out(g), os.str());
        std::printf("mean accuracy %.4f  std %.4f\n", report.mean, report.stddev);
      }
    } else if (*exp) {
      auto cfg = load_experiment_config(config_path);
      if (!g.out.empty()) cfg.out = g.out;
      if (g.workers > 0) cfg.workers = g.workers;
      const auto result = run_experiment(cfg);
      write_experiment_reports(cfg, result);
      for (const auto& cell : result.cells) {
        std::printf("qp %d  rate %g  calibration qp %d  accuracy %.4f +- %.4f\n", cell.qp, cell.rate,
                    cell.calibration_qp, cell.report.mean, cell.report.stddev);
      }
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "mvsteg %s: %s\n", step, e.what());
    return 1;
  }
  return 0;
}
