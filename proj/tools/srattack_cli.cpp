// srattack: super-resolution face attack and detector evaluation toolkit.
//
//   srattack manifest build    --root DIR --split split.json --method M --out manifest.csv --seed S
//   srattack manifest validate --manifest manifest.csv
//   srattack attack            --manifest manifest.csv --k 2 --backend edsr --weights w.srw --out DIR
//   srattack similarity        --pairs pairs.csv --out similarity.csv
//   srattack evaluate          --manifest m.csv --scores-plain a.csv --scores-attacked b.csv
//                              --setup both|fake-only --out DIR
//   srattack model inspect     --weights w.srw
//
// Exit codes: 0 success, 1 validation findings, 2 usage error, 3 I/O or format error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "srattack.hpp"

namespace fs = std::filesystem;
using namespace srattack;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFindings = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  int jobs = default_jobs();
};

fs::path parent_or_cwd(const fs::path& p) {
  const fs::path parent = p.parent_path();
  return parent.empty() ? fs::path(".") : parent;
}

fs::path sidecar_path(const fs::path& out) { return fs::path(out.string() + ".run.json"); }

// --- manifest -----------------------------------------------------------------

struct ManifestBuildOptions {
  fs::path root;
  fs::path split;
  std::string method;
  int frames_per_video = 10;
  fs::path boxes;
  fs::path out;
};

int run_manifest_build(const ManifestBuildOptions& o, const GlobalOptions& g) {
  if (!g.seed) throw UsageError("manifest build requires --seed (sampling must be reproducible)");
  const auto method = parse_forgery_method(o.method);
  if (!method || *method == ForgeryMethod::none) {
    throw UsageError("unknown forgery method '" + o.method + "'");
  }
  const SplitSpec split = read_split(o.split);
  ManifestBuild built = build_manifest(o.root, split, *method, o.frames_per_video, *g.seed);
  for (const auto& w : built.warnings) std::cerr << "warning: " << w << "\n";
  std::size_t attached = 0;
  if (!o.boxes.empty()) attached = attach_boxes(built.entries, read_boxes(o.boxes));
  write_manifest(o.out, built.entries);

  RunManifest run;
  run.subcommand = "manifest build";
  run.config = {{"root", o.root.string()},
                {"split", o.split.string()},
                {"split_sha256", sha256_file(o.split)},
                {"method", std::string(to_string(*method))},
                {"frames_per_video", o.frames_per_video},
                {"seed", *g.seed},
                {"boxes", o.boxes.string()},
                {"out", o.out.string()},
                {"entries", built.entries.size()},
                {"warnings", built.warnings}};
  run.write(sidecar_path(o.out));
  std::cout << "wrote " << built.entries.size() << " entries to " << o.out.string();
  if (!o.boxes.empty()) std::cout << " (" << attached << " with face boxes)";
  std::cout << "\n";
  return kExitOk;
}

struct ManifestValidateOptions {
  fs::path manifest;
  fs::path root;
};

int run_manifest_validate(const ManifestValidateOptions& o) {
  const auto entries = read_manifest(o.manifest);
  const fs::path root = o.root.empty() ? parent_or_cwd(o.manifest) : o.root;
  const ValidationReport r = validate_manifest(entries, root);
  std::cout << "entries: " << r.entry_count << "\n"
            << "with face box: " << r.with_box << " (" << csv::format_fixed(100.0 * r.box_rate(), 1)
            << "%)\n"
            << "violations: " << r.violations.size() << "\n";
  for (const auto& v : r.violations) std::cout << "  " << v << "\n";
  return r.ok() ? kExitOk : kExitFindings;
}

// --- attack ---------------------------------------------------------------------

struct AttackOptions {
  fs::path manifest;
  fs::path root;
  int k = 2;
  std::string backend = "edsr";
  fs::path weights;
  fs::path out;
  bool overwrite = false;
  double margin = 0.0;
  bool similarity = false;
};

int run_attack(const AttackOptions& o, const GlobalOptions& g) {
  const auto backend = parse_backend(o.backend);
  if (!backend) throw UsageError("--backend must be edsr or bicubic");
  if (*backend == Backend::edsr && o.weights.empty()) {
    throw UsageError("--backend edsr requires --weights");
  }
  if (*backend == Backend::bicubic && !o.weights.empty()) {
    throw UsageError("--weights is only valid with --backend edsr");
  }
  AttackConfig cfg;
  try {
    cfg.k = ScaleFactor(o.k);
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  cfg.backend = *backend;
  cfg.weights = o.weights;
  cfg.output_dir = o.out;
  cfg.overwrite = o.overwrite ? OverwritePolicy::allow : OverwritePolicy::deny;
  cfg.margin = o.margin;
  cfg.log_similarity = o.similarity;

  std::optional<SrModel> model;
  std::string digest;
  if (cfg.backend == Backend::edsr) {
    model = load_weights(cfg.weights);
    digest = sha256_file(cfg.weights);
    if (model->scale != cfg.k) {
      throw UsageError("weight file is x" + std::to_string(model->scale.value()) +
                       " but --k is " + std::to_string(cfg.k.value()));
    }
  }

  const auto entries = read_manifest(o.manifest);
  const fs::path root = o.root.empty() ? parent_or_cwd(o.manifest) : o.root;
  fs::create_directories(cfg.output_dir);
  const auto records =
      attack_batch(entries, cfg, root, model ? &*model : nullptr, g.jobs);
  write_attack_log(cfg.output_dir / "attack_log.csv", records);

  std::size_t ok = 0;
  std::size_t skipped = 0;
  for (const auto& r : records) {
    if (r.ok()) {
      ++ok;
    } else {
      ++skipped;
      std::cerr << "skipped " << r.source << ": " << r.status << "\n";
    }
  }

  RunManifest run;
  run.subcommand = "attack";
  run.config = {{"manifest", o.manifest.string()},
                {"manifest_sha256", sha256_file(o.manifest)},
                {"root", root.string()},
                {"k", cfg.k.value()},
                {"backend", std::string(to_string(cfg.backend))},
                {"weights", cfg.weights.string()},
                {"weights_sha256", digest},
                {"margin", cfg.margin},
                {"overwrite", o.overwrite},
                {"similarity", cfg.log_similarity},
                {"resampler", kResamplerDescription},
                {"output_format", "PNG, 8-bit RGB"},
                {"jobs", g.jobs},
                {"attacked", ok},
                {"skipped", skipped}};
  if (model) {
    run.config["model"] = {{"scale", model->scale.value()},
                           {"n_feats", model->n_feats},
                           {"n_resblocks", model->n_resblocks},
                           {"res_scale", model->res_scale},
                           {"rgb_mean", model->rgb_mean}};
  }
  run.write(cfg.output_dir / "run_manifest.json");
  std::cout << "attacked " << ok << " images, skipped " << skipped << "\n";
  return kExitOk;
}

// --- similarity -----------------------------------------------------------------

struct SimilarityOptions {
  fs::path pairs;
  fs::path root;
  fs::path out;
};

int run_similarity(const SimilarityOptions& o, const GlobalOptions& g) {
  const fs::path root = o.root.empty() ? parent_or_cwd(o.pairs) : o.root;
  const auto pairs = read_pairs(o.pairs, root);
  const auto groups = similarity_report(pairs, g.jobs);
  write_similarity_report(o.out, groups);

  RunManifest run;
  run.subcommand = "similarity";
  run.config = {{"pairs", o.pairs.string()},
                {"pairs_sha256", sha256_file(o.pairs)},
                {"root", root.string()},
                {"out", o.out.string()},
                {"ssim", "global statistics over all samples, channels pooled, "
                         "C1=(0.01*255)^2, C2=(0.03*255)^2"},
                {"psnr_peak", kPeakValue},
                {"jobs", g.jobs}};
  run.write(sidecar_path(o.out));
  for (const auto& gr : groups) {
    std::cout << gr.group << ": n=" << gr.pair_count << " ssim=" << csv::format_fixed(gr.ssim_mean, 3)
              << " psnr="
              << (gr.psnr_mean_db ? csv::format_fixed(*gr.psnr_mean_db, 1) + " dB" : "inf")
              << "\n";
  }
  return kExitOk;
}

// --- evaluate -------------------------------------------------------------------

struct EvaluateOptions {
  fs::path manifest;
  fs::path scores_plain;
  fs::path scores_attacked;
  std::string setup;
  fs::path out;
  double threshold = kDefaultThreshold;
  std::string model_tag = "detector";
  std::string split = "test";
  fs::path attack_log;
};

std::map<std::string, double> ssim_from_attack_log(const fs::path& path) {
  const csv::Table t = csv::read(path, attack_log_header());
  std::map<std::string, double> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    if (row.size() != attack_log_header().size()) {
      throw FormatError(path.string() + ":" + std::to_string(t.line_numbers[r]) +
                        ": wrong field count");
    }
    if (row[10] != "ok" || row[8].empty()) continue;
    const auto v = csv::parse_double(row[8]);
    if (!v) throw FormatError(path.string() + ": bad ssim '" + row[8] + "'");
    out[row[0]] = *v;
  }
  return out;
}

int run_evaluate(const EvaluateOptions& o) {
  AttackSetup setup;
  if (o.setup == "both") {
    setup = AttackSetup::attack_both;
  } else if (o.setup == "fake-only") {
    setup = AttackSetup::attack_fake_only;
  } else {
    throw UsageError("--setup must be both or fake-only");
  }
  if (o.model_tag.empty() ||
      o.model_tag.find_first_of("/\\ ,") != std::string::npos) {
    throw UsageError("--model-tag must be non-empty without '/', '\\', ',' or spaces");
  }
  if (!(o.threshold >= 0.0 && o.threshold <= 1.0)) throw UsageError("--threshold must be in [0,1]");

  auto entries = read_manifest(o.manifest);
  if (o.split != "all") {
    const auto sp = parse_split(o.split);
    if (!sp) throw UsageError("--split must be train, test or all");
    std::erase_if(entries, [&](const ManifestEntry& e) { return e.split != *sp; });
  }
  const ScoreTable plain = read_scores(o.scores_plain);
  const ScoreTable attacked = read_scores(o.scores_attacked);
  const auto rows = evaluate_setup(entries, plain, attacked, setup, o.threshold, o.model_tag);

  fs::create_directories(o.out);
  write_report(o.out / "report.csv", rows);
  for (const auto& r : rows) write_roc(o.out / roc_file_name(r), r.roc);
  if (!o.attack_log.empty()) {
    write_correlation(o.out / "correlation.csv",
                      ssim_error_correlation(entries, plain, attacked,
                                             ssim_from_attack_log(o.attack_log), o.threshold));
  }

  RunManifest run;
  run.subcommand = "evaluate";
  run.config = {{"manifest", o.manifest.string()},
                {"manifest_sha256", sha256_file(o.manifest)},
                {"scores_plain", o.scores_plain.string()},
                {"scores_plain_sha256", sha256_file(o.scores_plain)},
                {"scores_attacked", o.scores_attacked.string()},
                {"scores_attacked_sha256", sha256_file(o.scores_attacked)},
                {"setup", std::string(to_string(setup))},
                {"threshold", o.threshold},
                {"tie_rule", "score >= threshold is predicted fake"},
                {"positive_class", "fake"},
                {"model_tag", o.model_tag},
                {"split", o.split},
                {"attack_log", o.attack_log.string()}};
  run.write(o.out / "run_manifest.json");

  auto fmt = [](const std::optional<double>& v) {
    return v ? csv::format_fixed(*v, 1) : std::string("undef");
  };
  std::cout << "model\tmethod\tSR\tFNR\tFPR\tRecall\tPrec\tAUC\tAcc\n";
  for (const auto& r : rows) {
    std::cout << r.model_tag << "\t" << to_string(r.method) << "\t" << (r.sr ? "yes" : "no")
              << "\t" << fmt(r.rates.fnr) << "\t" << fmt(r.rates.fpr) << "\t"
              << fmt(r.rates.recall) << "\t" << fmt(r.rates.precision) << "\t"
              << csv::format_fixed(r.auc, 1) << "\t" << fmt(r.rates.accuracy) << "\n";
  }
  return kExitOk;
}

// --- model ------------------------------------------------------------------------

int run_model_inspect(const fs::path& weights) {
  const SrModel m = load_weights(weights);
  std::size_t params = 0;
  for (const auto& l : m.layers) params += l.weights.size() + l.bias.size();
  std::cout << "scale: " << m.scale.value() << "\n"
            << "n_feats: " << m.n_feats << "\n"
            << "n_resblocks: " << m.n_resblocks << "\n"
            << "res_scale: " << csv::format_double(m.res_scale) << "\n"
            << "rgb_mean: " << csv::format_double(m.rgb_mean[0]) << " "
            << csv::format_double(m.rgb_mean[1]) << " " << csv::format_double(m.rgb_mean[2])
            << "\n"
            << "layers: " << m.layers.size() << "\n"
            << "parameters: " << params << "\n"
            << "sha256: " << sha256_file(weights) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Super-resolution face attack and deepfake-detector evaluation toolkit", "srattack"};
  app.set_version_flag("--version", std::string(kToolkitVersion));
  app.require_subcommand(1);
  app.fallthrough();  // let --seed/--jobs follow the subcommand

  GlobalOptions g;
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "Sampling seed (required by manifest build)");
  app.add_option("--jobs", g.jobs, "Worker threads (default: logical cores)")
      ->check(CLI::PositiveNumber);

  auto* manifest_cmd = app.add_subcommand("manifest", "Build or validate an experiment manifest");
  manifest_cmd->require_subcommand(1);

  ManifestBuildOptions mb;
  auto* build_cmd = manifest_cmd->add_subcommand("build", "Sample frames into a manifest CSV");
  build_cmd->add_option("--root", mb.root, "Frame root: <root>/{pristine,<Method>}/<video>/<frames>")
      ->required();
  build_cmd->add_option("--split", mb.split, "Split JSON {\"train\": [...], \"test\": [...]}")
      ->required();
  build_cmd->add_option("--method", mb.method, "Forgery method")->required();
  build_cmd->add_option("--frames-per-video", mb.frames_per_video, "Frames sampled per video")
      ->check(CLI::PositiveNumber);
  build_cmd->add_option("--boxes", mb.boxes, "Face box CSV (path,x,y,w,h)");
  build_cmd->add_option("--out", mb.out, "Output manifest CSV")->required();

  ManifestValidateOptions mv;
  auto* validate_cmd = manifest_cmd->add_subcommand("validate", "Check balance, paths and boxes");
  validate_cmd->add_option("--manifest", mv.manifest, "Manifest CSV")->required();
  validate_cmd->add_option("--root", mv.root, "Data root (default: manifest directory)");

  AttackOptions at;
  auto* attack_cmd = app.add_subcommand("attack", "Apply the SR face attack to every manifest entry");
  attack_cmd->add_option("--manifest", at.manifest, "Manifest CSV")->required();
  attack_cmd->add_option("--root", at.root, "Data root (default: manifest directory)");
  attack_cmd->add_option("--k", at.k, "Scale factor (2, 3 or 4)");
  attack_cmd->add_option("--backend", at.backend, "edsr or bicubic");
  attack_cmd->add_option("--weights", at.weights, "SRW1 weight file (edsr backend)");
  attack_cmd->add_option("--out", at.out, "Output directory")->required();
  attack_cmd->add_flag("--overwrite", at.overwrite, "Replace existing outputs");
  attack_cmd->add_option("--margin", at.margin, "Grow each face box by this fraction per side")
      ->check(CLI::NonNegativeNumber);
  attack_cmd->add_flag("--similarity", at.similarity, "Log SSIM/PSNR of each attacked frame");

  SimilarityOptions si;
  auto* sim_cmd = app.add_subcommand("similarity", "Mean SSIM/PSNR per group of image pairs");
  sim_cmd->add_option("--pairs", si.pairs, "Pairs CSV (original,attacked,group)")->required();
  sim_cmd->add_option("--root", si.root, "Base for relative paths (default: pairs directory)");
  sim_cmd->add_option("--out", si.out, "Output CSV")->required();

  EvaluateOptions ev;
  auto* eval_cmd = app.add_subcommand("evaluate", "Detector metrics with and without the attack");
  eval_cmd->add_option("--manifest", ev.manifest, "Manifest CSV")->required();
  eval_cmd->add_option("--scores-plain", ev.scores_plain, "Scores on clean images")->required();
  eval_cmd->add_option("--scores-attacked", ev.scores_attacked, "Scores on attacked images")
      ->required();
  eval_cmd->add_option("--setup", ev.setup, "both or fake-only")->required();
  eval_cmd->add_option("--out", ev.out, "Output directory")->required();
  eval_cmd->add_option("--threshold", ev.threshold, "Decision threshold (score >= t is fake)");
  eval_cmd->add_option("--model-tag", ev.model_tag, "Detector name used in reports");
  eval_cmd->add_option("--split", ev.split, "train, test or all (default test)");
  eval_cmd->add_option("--attack-log", ev.attack_log,
                       "Attack log with SSIM values, enables correlation.csv");

  fs::path inspect_weights;
  auto* model_cmd = app.add_subcommand("model", "Inspect SR weight files");
  model_cmd->require_subcommand(1);
  auto* inspect_cmd = model_cmd->add_subcommand("inspect", "Print architecture fields");
  inspect_cmd->add_option("--weights", inspect_weights, "SRW1 weight file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }
  if (*seed_opt) g.seed = seed;

  try {
    if (*build_cmd) return run_manifest_build(mb, g);
    if (*validate_cmd) return run_manifest_validate(mv);
    if (*attack_cmd) return run_attack(at, g);
    if (*sim_cmd) return run_similarity(si, g);
    if (*eval_cmd) return run_evaluate(ev);
    if (*inspect_cmd) return run_model_inspect(inspect_weights);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  std::cerr << app.help();
  return kExitUsage;
}
