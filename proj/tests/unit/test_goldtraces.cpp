#include <doctest.h>

#include <sstream>

#include "fgd/corpus.hpp"
#include "fgd/goldtraces.hpp"
#include "support.hpp"

using namespace fgd;

namespace {

const char* kTraceObject =
    "(ROOT (SBARQ (WHNP-1-<INANIM>-<THEME-V1> (WP what)) (SQ (VP (MD should) "
    "(NP-<ANIM>-<AGENT-V1> (DT the) (NN birdie)) (VP (VB-<V1> say) (NP (-NONE-ABAR-WH- *T*-1))))) "
    "(. ?)))";
const char* kTraceSubject =
    "(ROOT (SBARQ (WHNP-1 (WP who)) (SQ (VP (MD should) (NP (-NONE-ABAR-WH- *T*-1)) (VP (VB "
    "say)))) (. ?)))";

LabelSet gold_of(const std::string& tree, const GoldOptions& opt = {}) {
  std::vector<GoldTree> trees = {{"x", parse_bracketed(tree), 1}};
  return gold_label_corpus(trees, opt).labels.at("x");
}

}  // namespace

TEST_SUITE("goldtraces") {
  TEST_CASE("coindex parsing") {
    CHECK(coindex_of("WHNP-1-<INANIM>-<THEME-V1>") == 1);
    CHECK(coindex_of("NP-SBJ-2") == 2);
    CHECK(coindex_of("PP=3") == 3);
    CHECK(coindex_of("WHADVP-12") == 12);
    CHECK_FALSE(coindex_of("NP").has_value());
    CHECK_FALSE(coindex_of("NP-<AGENT-1>").has_value());
    CHECK_FALSE(coindex_of("-NONE-ABAR-WH-").has_value());
  }

  TEST_CASE("trace extraction links filler and gap") {
    auto t = parse_bracketed(kTraceObject);
    auto ex = extract_traces(t);
    REQUIRE(ex.sites.size() == 1);
    CHECK(ex.unmatched.empty());
    const auto& s = ex.sites[0];
    CHECK(s.trace_index == 1);
    CHECK(s.filler_category == "WHNP");
    CHECK(s.gap_parent_label == "NP");
    CHECK(s.trace_kind == kWhTraceKind);
    CHECK(t.at(s.filler_path)->raw_label() == "WHNP-1-<INANIM>-<THEME-V1>");
    CHECK(t.at(s.trace_path)->word() == "*T*-1");
  }

  TEST_CASE("traces without index or filler are unmatched") {
    auto t = parse_bracketed("(ROOT (SBARQ (WHNP (WP what)) (SQ (VP (VB say) (NP (-NONE-ABAR-WH- *T*)))) (. ?)))");
    auto ex = extract_traces(t);
    CHECK(ex.sites.empty());
    REQUIRE(ex.unmatched.size() == 1);
    CHECK(ex.unmatched[0].trace_index == 0);
    auto t2 = parse_bracketed("(ROOT (S (NP (PRP I)) (VP (VB say) (NP (-NONE-ABAR-WH- *T*-4)))))");
    auto ex2 = extract_traces(t2);
    REQUIRE(ex2.unmatched.size() == 1);
    CHECK(ex2.unmatched[0].trace_index == 4);
  }

  TEST_CASE("matrix questions") {
    CHECK(gold_of(kTraceObject) == LabelSet{Label::OMQ});
    CHECK(gold_of(kTraceSubject) == LabelSet{Label::SMQ});
    CHECK(gold_of("(ROOT (SBARQ (WHADVP-1 (WRB where)) (SQ (VBD did) (NP (PRP you)) (VP (VB go) "
                  "(ADVP (-NONE-ABAR-WH- *T*-1)))) (. ?)))") == LabelSet{Label::AMQ});
    CHECK(gold_of("(ROOT (SBARQ (WHNP-1 (WDT which) (NN book)) (SQ (VBP do) (NP (PRP I)) (VP (VB "
                  "remember) (SBAR (S (NP (NNP Mary)) (VP (VBD wrote) (NP (-NONE-ABAR-WH- "
                  "*T*-1))))))) (. ?)))") == LabelSet{Label::CC_OMQ});
  }

  TEST_CASE("embedded questions and relative clauses") {
    CHECK(gold_of("(ROOT (S (NP (PRP I)) (VP (VBP remember) (SBAR (WHNP-1 (WDT which) (NN book)) "
                  "(S (NP (NNP Mary)) (VP (VBD wrote) (NP (-NONE-ABAR-WH- *T*-1)))))) (. .)))") ==
          LabelSet{Label::OEQ});
    CHECK(gold_of("(ROOT (S (NP (NP (DT The) (NN professor)) (SBAR (WHNP-1 (WP who)) (S (NP "
                  "(-NONE-ABAR-WH- *T*-1)) (VP (VBD praised) (NP (DT the) (NN student)))))) (VP "
                  "(VBD smiled)) (. .)))") == LabelSet{Label::SRC});
    CHECK(gold_of("(ROOT (S (NP (NP (DT The) (NN student)) (SBAR (WHNP-1 (WP who)) (S (NP (DT "
                  "the) (NN professor)) (VP (VBD praised) (NP (-NONE-ABAR-WH- *T*-1)))))) (VP (VBD "
                  "smiled)) (. .)))") == LabelSet{Label::ORC});
    CHECK(gold_of("(ROOT (S (NP (NP (DT the) (NN man)) (SBAR (WHNP-1 (WP$ whose) (NN dog)) (S (NP "
                  "(PRP I)) (VP (VBD saw) (NP (-NONE-ABAR-WH- *T*-1)))))) (VP (VBD left)) (. .)))") ==
          LabelSet{Label::PRC});
  }

  TEST_CASE("trees without wh traces yield nothing") {
    CHECK(gold_of("(ROOT (S (NP (PRP you)) (VP (VBD built) (NP (PRP it))) (. .)))").empty());
    CHECK(gold_of("(ROOT (S (NP (-NONE- *)) (VP (TO to) (VP (VB go)))))").empty());
  }

  TEST_CASE("relative-clause trace kinds are gated by an option") {
    const std::string rel =
        "(ROOT (S (NP (NP (DT The) (NN professor)) (SBAR (WHNP-1 (WP who)) (S (NP "
        "(-NONE-ABAR-REL- *T*-1)) (VP (VBD praised) (NP (DT the) (NN student)))))) (VP (VBD "
        "smiled)) (. .)))";
    CHECK(gold_of(rel).empty());
    GoldOptions opt;
    opt.rc_traces = true;
    CHECK(gold_of(rel, opt) == LabelSet{Label::SRC});
  }

  TEST_CASE("unclassifiable sites are reported, not labelled") {
    std::vector<GoldTree> trees = {
        {"odd", parse_bracketed("(ROOT (S (PP (WHNP-1 (WP what)) (S (VP (VB say) (NP "
                                "(-NONE-ABAR-WH- *T*-1)))))))"),
         3}};
    auto r = gold_label_corpus(trees);
    CHECK(r.labels.at("odd").empty());
    CHECK(r.n_sites == 1);
    CHECK(r.n_unknown == 1);
    REQUIRE(r.diagnostics.size() == 1);
    CHECK(r.diagnostics[0].line == 3);
  }

  TEST_CASE("tree files: multi-line records, ids, malformed entries") {
    std::istringstream in(std::string("a\t") + kTraceObject + "\n" +
                          "(ROOT (S (NP (PRP you))\n   (VP (VBD ran))))\n" +
                          "\n(ROOT (S (NP (PRP I))\n\nb\t" + kTraceSubject + "\n" +
                          "(S (NP x)))\n");
    auto f = read_gold_trees(in);
    REQUIRE(f.trees.size() == 3);
    CHECK(f.trees[0].id == "a");
    CHECK(f.trees[1].id == "tree-2");
    CHECK(f.trees[1].line == 2);
    CHECK(f.trees[2].id == "b");
    CHECK(f.malformed.size() == 2);
    auto r = gold_label_corpus(f.trees);
    CHECK(r.labels.at("a") == LabelSet{Label::OMQ});
    CHECK(r.labels.at("b") == LabelSet{Label::SMQ});
    std::istringstream again(std::string("(S (NP x)))\n"));
    CHECK_THROWS_AS(read_gold_trees(again, true), CorpusError);
  }

  TEST_CASE("checked-in gold tree fixture") {
    auto f = read_gold_trees(test::fixture("gold_trees.txt"), true);
    auto r = gold_label_corpus(f.trees);
    CHECK(r.labels.at("trace-object") == LabelSet{Label::OMQ});
    CHECK(r.labels.at("trace-subject") == LabelSet{Label::SMQ});
    CHECK(r.labels.at("no-trace").empty());
    CHECK(r.labels.at("rc-subject") == LabelSet{Label::SRC});
  }
}
