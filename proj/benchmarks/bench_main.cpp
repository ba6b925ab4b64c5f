#include <benchmark/benchmark.h>

#include <fstream>
#include <sstream>

#include "screenwise/casegen.hpp"
#include "screenwise/llmlink.hpp"
#include "screenwise/oracle.hpp"
#include "screenwise/prompts.hpp"

using namespace screenwise;

namespace {

std::string pack_text() {
    std::ifstream in(llm::default_rules_path());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

const rules::RuleSet& pack() {
    static const auto rs = rules::parse_rules(pack_text());
    return rs;
}

void BM_ParseRules(benchmark::State& state) {
    const auto text = pack_text();
    for (auto _ : state) benchmark::DoNotOptimize(rules::parse_rules(text));
}
BENCHMARK(BM_ParseRules);

void BM_EvaluateGrid(benchmark::State& state) {
    const auto grid = oracle::enumerate_input_grid(pack());
    for (auto _ : state) {
        std::size_t fired = 0;
        for (const auto& c : grid) fired += oracle::evaluate(c, pack()).triggered.size();
        benchmark::DoNotOptimize(fired);
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * grid.size()));
}
BENCHMARK(BM_EvaluateGrid)->Unit(benchmark::kMillisecond);

void BM_GenerateCases(benchmark::State& state) {
    casegen::GeneratorConfig cfg;
    cfg.count = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(casegen::generate_cases(cfg));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GenerateCases)->Arg(50)->Arg(5000);

void BM_ParseResponse(benchmark::State& state) {
    std::set<rules::RuleId> known;
    for (const auto& r : pack().rules()) known.insert(r.id);
    const std::string raw =
        "Applying the stored rules.\nRECOMMENDATION: ANNUAL_MRI_AND_MAMMOGRAM\nTRIGGERED_RULES: R1, R6, R99\n"
        "EXPLANATION: R1 holds because the person carries a BRCA mutation and is over 30.\n\nAnything else?";
    for (auto _ : state) benchmark::DoNotOptimize(llm::parse_response(raw, known));
}
BENCHMARK(BM_ParseResponse);

void BM_MockSessionArm(benchmark::State& state) {
    const auto prompts = llm::load_prompts(llm::default_prompts_dir());
    const auto cases = casegen::generate_cases({});
    for (auto _ : state) {
        auto s = llm::start_session({}, prompts);
        s.load_rules(pack());
        for (const auto& c : cases) benchmark::DoNotOptimize(s.query_case(casegen::render_unstructured(c, 1)));
    }
}
BENCHMARK(BM_MockSessionArm)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
