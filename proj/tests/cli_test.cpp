#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "cli_support.hpp"
#include "srattack.hpp"
#include "test_support.hpp"

using namespace srattack;
using testing_support::run_cli;
using testing_support::shell_quote;
using testing_support::TempDir;

namespace {

std::string q(const std::filesystem::path& p) { return shell_quote(p.string()); }

}  // namespace

TEST(Cli, ModelInspectPrintsArchitecture) {
  TempDir dir;
  std::mt19937_64 rng(1);
  write_weights(testing_support::random_model(rng, 4, 8, 3, 0.1f), dir / "w.srw");
  const auto r = run_cli("model inspect --weights " + q(dir / "w.srw"));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("scale: 4"), std::string::npos);
  EXPECT_NE(r.output.find("n_feats: 8"), std::string::npos);
  EXPECT_NE(r.output.find("n_resblocks: 3"), std::string::npos);
  EXPECT_NE(r.output.find("layers: 11"), std::string::npos);
}

TEST(Cli, ExitCodes) {
  TempDir dir;
  EXPECT_EQ(run_cli("--bogus").exit_code, 2);
  EXPECT_EQ(run_cli("").exit_code, 2);
  EXPECT_EQ(run_cli("model inspect --weights " + q(dir / "missing.srw")).exit_code, 3);
  std::ofstream(dir / "junk.srw") << "not weights";
  EXPECT_EQ(run_cli("model inspect --weights " + q(dir / "junk.srw")).exit_code, 3);

  std::ofstream(dir / "m.csv") << "path,label,method,split,video_id,frame_idx,box_x,box_y,box_w,box_h\n";
  EXPECT_EQ(run_cli("attack --manifest " + q(dir / "m.csv") + " --out " + q(dir / "o")).exit_code, 2)
      << "edsr without weights";
  EXPECT_EQ(run_cli("attack --backend bicubic --k 5 --manifest " + q(dir / "m.csv") + " --out " +
                    q(dir / "o"))
                .exit_code,
            2);
  std::mt19937_64 rng(2);
  write_weights(testing_support::random_model(rng, 3, 2, 0), dir / "w3.srw");
  EXPECT_EQ(run_cli("attack --k 2 --weights " + q(dir / "w3.srw") + " --manifest " + q(dir / "m.csv") +
                    " --out " + q(dir / "o"))
                .exit_code,
            2);
  EXPECT_EQ(run_cli("manifest build --root " + q(dir.path()) + " --split x --method Deepfakes --out " +
                    q(dir / "n.csv"))
                .exit_code,
            2)
      << "missing --seed";
}

TEST(Cli, ManifestBuildValidateAttackEvaluate) {
  TempDir data, out;
  const SplitSpec split = testing_support::make_frame_tree(data.path(), "Deepfakes", 2, 2, 4);
  // Overwrite the empty frames with real images and give each a box.
  std::mt19937_64 rng(3);
  std::ofstream boxes(data / "boxes.csv");
  boxes << "path,x,y,w,h\n";
  for (const auto& f : std::filesystem::recursive_directory_iterator(data.path())) {
    if (f.path().extension() != ".png") continue;
    save_image(testing_support::random_image(rng, 20, 16, true), f.path());
    boxes << std::filesystem::relative(f.path(), data.path()).generic_string() << ",2,2,11,9\n";
  }
  boxes.close();
  {
    std::ofstream js(data / "split.json");
    js << nlohmann::json{{"train", split.train}, {"test", split.test}}.dump();
  }

  const auto b = run_cli("manifest build --seed 9 --root " + q(data.path()) + " --split " +
                         q(data / "split.json") + " --method deepfakes --frames-per-video 2 --boxes " +
                         q(data / "boxes.csv") + " --out " + q(data / "m.csv"));
  ASSERT_EQ(b.exit_code, 0) << b.output;
  EXPECT_TRUE(std::filesystem::exists(data / "m.csv.run.json"));
  const auto v = run_cli("manifest validate --manifest " + q(data / "m.csv"));
  ASSERT_EQ(v.exit_code, 0) << v.output;
  EXPECT_NE(v.output.find("entries: 16"), std::string::npos);

  const auto a = run_cli("attack --backend bicubic --k 3 --similarity --jobs 3 --manifest " +
                         q(data / "m.csv") + " --out " + q(out / "atk"));
  ASSERT_EQ(a.exit_code, 0) << a.output;
  EXPECT_TRUE(std::filesystem::exists(out / "atk" / "run_manifest.json"));
  const auto again = run_cli("attack --backend bicubic --k 3 --manifest " + q(data / "m.csv") +
                             " --out " + q(out / "atk"));
  EXPECT_EQ(again.exit_code, 3) << "overwrite is denied by default";

  ScoreTable plain, attacked;
  for (const auto& e : read_manifest(data / "m.csv")) {
    const bool fake = e.label == Label::fake;
    plain[e.path] = fake ? 0.9 : 0.1;
    attacked[e.path] = fake ? 0.3 : 0.2;
  }
  write_scores(data / "plain.csv", plain);
  write_scores(data / "attacked.csv", attacked);
  const auto ev = run_cli("evaluate --setup fake-only --model-tag xcep --manifest " + q(data / "m.csv") +
                          " --scores-plain " + q(data / "plain.csv") + " --scores-attacked " +
                          q(data / "attacked.csv") + " --attack-log " + q(out / "atk" / "attack_log.csv") +
                          " --out " + q(out / "eval"));
  ASSERT_EQ(ev.exit_code, 0) << ev.output;
  const auto report = csv::read(out / "eval" / "report.csv", report_header());
  ASSERT_EQ(report.rows.size(), 2u);
  EXPECT_EQ(report.rows[0][8], report.rows[1][8]);  // fpr
  EXPECT_EQ(report.rows[0][7], "0");                // fnr without SR
  EXPECT_EQ(report.rows[1][7], "100");              // every fake slips through
  EXPECT_TRUE(std::filesystem::exists(out / "eval" / "roc_xcep_Deepfakes_sr.csv"));
  EXPECT_TRUE(std::filesystem::exists(out / "eval" / "correlation.csv"));
}

TEST(Cli, ValidateReportsFindings) {
  TempDir dir;
  std::ofstream(dir / "m.csv") << "path,label,method,split,video_id,frame_idx,box_x,box_y,box_w,box_h\n"
                                  "pristine/000/1.png,pristine,none,test,000,1,,,,\n";
  const auto r = run_cli("manifest validate --manifest " + q(dir / "m.csv"));
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.output.find("missing file"), std::string::npos);
}

TEST(Cli, SimilarityReport) {
  TempDir dir;
  save_image(Image(4, 4, 10.0), dir / "a.png");
  save_image(Image(4, 4, 12.0), dir / "b.png");
  std::ofstream(dir / "pairs.csv") << "original,attacked,group\na.png,a.png,same\na.png,b.png,diff\n";
  const auto r = run_cli("similarity --pairs " + q(dir / "pairs.csv") + " --out " + q(dir / "s.csv"));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const auto t = csv::read(dir / "s.csv");
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[1][0], "same");
  EXPECT_EQ(t.rows[1][3], "inf");
  EXPECT_EQ(t.rows[0][0], "diff");
}
