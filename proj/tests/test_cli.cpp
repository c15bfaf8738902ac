#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>

#include "fusedec/experiment.hpp"
#include "fusedec/fusion.hpp"
#include "fusedec/synth_task.hpp"
#include "fusedec/util.hpp"
#include "test_helpers.hpp"

using namespace fusedec;

namespace {

int run_cli(const std::string& args) {
  std::string cmd = std::string(FUSEDEC_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

// Small task artifacts generated once through the CLI itself.
const std::string& cli_workspace() {
  static std::string dir = [] {
    std::string d = test_scratch_dir("cli");
    std::string gen = "gen-task --out " + d + " --seed 33 --n-train 200 --n-eval 12";
    REQUIRE(run_cli(gen) == 0);
    REQUIRE(run_cli("train-base --src " + d + "/train.src.txt --tgt " + d +
                    "/train.tgt.txt --src-vocab " + d + "/src.vocab --tgt-vocab " + d +
                    "/tgt.vocab --out " + d + "/base.model --lr 0.1 --epochs 3 --seed 5 "
                    "--embed 8 --hidden 10") == 0);
    REQUIRE(run_cli("train-elm --corpus " + d + "/mono_f.txt --vocab " + d +
                    "/tgt.vocab --order 2 --k 0.1 --out " + d + "/elm_f.ngram") == 0);
    REQUIRE(run_cli("estimate-ilm --model " + d + "/base.model --sources " + d +
                    "/train.src.txt --src-vocab " + d + "/src.vocab --out " + d + "/ilm.ctx") ==
            0);
    return d;
  }();
  return dir;
}

}  // namespace

TEST_CASE("gen-task emits the full artifact set") {
  const std::string& d = cli_workspace();
  for (const char* name :
       {"src.vocab", "tgt.vocab", "train.src.txt", "train.tgt.txt", "train_f.src.txt",
        "train_m.tgt.txt", "mono_f.txt", "mono_m.txt", "eval_aligned.tsv", "eval_swapped.tsv",
        "eval.src.txt", "task_manifest.json"}) {
    CHECK(std::filesystem::exists(d + "/" + name));
  }
}

TEST_CASE("weight-zero decode equals base-only decoding byte for byte") {
  const std::string& d = cli_workspace();
  REQUIRE(run_cli("decode --model " + d + "/base.model --ilm-context " + d +
                  "/ilm.ctx --elm " + d + "/elm_f.ngram --src-vocab " + d +
                  "/src.vocab --tgt-vocab " + d + "/tgt.vocab --beta-ilm 0 --beta-elm 0 "
                  "--beam 3 --max-len 8 --input " + d + "/eval.src.txt --output " + d +
                  "/hyp_zero.txt") == 0);

  ToySeq2Seq model = ToySeq2Seq::load(d + "/base.model");
  Vocabulary sv = Vocabulary::load(d + "/src.vocab");
  Vocabulary tv = Vocabulary::load(d + "/tgt.vocab");
  DecodeOptions opts;
  opts.beam = 3;
  opts.max_len = 8;
  std::vector<std::string> base_hyps;
  for (const auto& line : read_lines(d + "/eval.src.txt")) {
    base_hyps.push_back(tv.decode(beam_search_base(model, sv.encode(line), opts).tokens));
  }
  std::string expected;
  for (const auto& h : base_hyps) expected += h + "\n";
  CHECK(read_file(d + "/hyp_zero.txt") == expected);
}

TEST_CASE("decode is deterministic across runs") {
  const std::string& d = cli_workspace();
  std::string flags = "decode --model " + d + "/base.model --ilm-context " + d +
                      "/ilm.ctx --elm " + d + "/elm_f.ngram --src-vocab " + d +
                      "/src.vocab --tgt-vocab " + d + "/tgt.vocab --beta-ilm 0.2 "
                      "--beta-elm 0.4 --beam 3 --max-len 8 --input " + d + "/eval.src.txt";
  REQUIRE(run_cli(flags + " --output " + d + "/hyp_a.txt") == 0);
  REQUIRE(run_cli(flags + " --output " + d + "/hyp_b.txt") == 0);
  CHECK(read_file(d + "/hyp_a.txt") == read_file(d + "/hyp_b.txt"));
}

TEST_CASE("evaluate scores perfect output at BLEU 100 and full accuracy") {
  const std::string& d = cli_workspace();
  AnnotatedEvalSet set = parse_eval_set(d + "/eval_aligned.tsv");
  std::vector<std::string> refs;
  for (const auto& s : set) refs.push_back(s.reference);
  write_lines(d + "/perfect.txt", refs);
  REQUIRE(run_cli("evaluate --hyp " + d + "/perfect.txt --eval-set " + d +
                  "/eval_aligned.tsv --report-prefix " + d + "/perfect_report") == 0);
  std::string report = read_file(d + "/perfect_report.txt");
  CHECK(report.find("bleu=100") != std::string::npos);
  CHECK(report.find("accuracy_f=100\n") != std::string::npos);
  CHECK(report.find("accuracy_m=100\n") != std::string::npos);
  CHECK(std::filesystem::exists(d + "/perfect_report.jsonl"));
}

TEST_CASE("extract-corpus partitions an input corpus") {
  const std::string& d = cli_workspace();
  write_file(d + "/raw.txt", "w1f c1\nw2m c2\nw1f w2m\nplain\n");
  REQUIRE(run_cli("extract-corpus --patterns " + std::string(FUSEDEC_SOURCE_DIR) +
                  "/data/patterns/synthetic.patterns --input " + d + "/raw.txt --out-f " + d +
                  "/raw_f.txt --out-m " + d + "/raw_m.txt --stats " + d + "/raw_stats.txt") ==
          0);
  CHECK(read_file(d + "/raw_f.txt") == "w1f c1\n");
  CHECK(read_file(d + "/raw_m.txt") == "w2m c2\n");
  std::string stats = read_file(d + "/raw_stats.txt");
  CHECK(stats.find("ambiguous 1") != std::string::npos);
  CHECK(stats.find("unmatched 1") != std::string::npos);
}

TEST_CASE("tune-betas emits the heatmap and tuning records") {
  const std::string& d = cli_workspace();
  REQUIRE(run_cli("tune-betas --model " + d + "/base.model --ilm-context " + d +
                  "/ilm.ctx --elm " + d + "/elm_f.ngram --src-vocab " + d +
                  "/src.vocab --tgt-vocab " + d + "/tgt.vocab --eval-set " + d +
                  "/eval_aligned.tsv --grid-step 0.5 --folds 3 --beam 3 --max-len 8 "
                  "--out-prefix " + d + "/tune") == 0);
  auto lines = read_lines(d + "/tune.heatmap.csv");
  CHECK(lines.size() == 10);  // header + 3x3 grid
  CHECK(lines[0] == "beta_ilm,beta_elm,bleu,accuracy,hmean");
  CHECK(std::filesystem::exists(d + "/tune.tuning.jsonl"));
  CHECK(std::filesystem::exists(d + "/tune.stitched.txt"));
}

TEST_CASE("exit codes distinguish usage and data errors") {
  const std::string& d = cli_workspace();
  CHECK(run_cli("no-such-command") == 1);
  CHECK(run_cli("decode --bogus-flag 1") == 1);
  CHECK(run_cli("evaluate --hyp " + d + "/does_not_exist.txt --eval-set " + d +
                "/eval_aligned.tsv --report-prefix " + d + "/r") == 2);
  // hypothesis/eval length mismatch is a data error
  write_lines(d + "/short.txt", {"w1f c1"});
  CHECK(run_cli("evaluate --hyp " + d + "/short.txt --eval-set " + d +
                "/eval_aligned.tsv --report-prefix " + d + "/r2") == 2);
}
