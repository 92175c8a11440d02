#include <gtest/gtest.h>

#include "currentkit/harness.hpp"

#include <fstream>

using namespace currentkit;
namespace fs = std::filesystem;

namespace {

class TempDir {
public:
    TempDir()
    {
        std::random_device rd;
        path_ = fs::temp_directory_path() / ("currentkit_test_" + std::to_string(rd()));
        fs::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    fs::path write(const std::string& name, const std::string& text) const
    {
        fs::path p = path_ / name;
        std::ofstream(p) << text;
        return p;
    }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

const char* kSegment = R"({"ambient": 2, "degree": 1, "vertices": [[0, 0], [1, 0]],
  "simplices": [{"vertices": [0, 1], "multiplicity": 1}]})";

std::string parse_error_where(const std::function<void()>& f)
{
    try {
        f();
    } catch (const ParseError& e) {
        return e.where();
    }
    return "";
}

} // namespace

TEST(FormatTest, NumberFormatting)
{
    EXPECT_EQ(format_number(0.0), "0");
    EXPECT_EQ(format_number(1.0), "1");
    EXPECT_EQ(format_number(-0.25), "-0.25");
    EXPECT_EQ(format_number(1.5e-4), "1.5000000000e-04");
    EXPECT_EQ(format_number(123456.789), "123456.789");
    EXPECT_EQ(format_number(std::nan("")), "nan");
}

TEST(FormatTest, CsvEscaping)
{
    EXPECT_EQ(csv_escape("plain"), "plain");
    EXPECT_EQ(csv_escape("a,b"), "\"a,b\"");
    EXPECT_EQ(csv_escape("say \"hi\""), "\"say \"\"hi\"\"\"");
}

TEST(JsonTest, ChainRoundTrip)
{
    Chain c = box_chain(Box::cube(2, 0, 1), 2);
    Chain back = chain_from_json(chain_to_json(c));
    EXPECT_TRUE((back - c).empty());
    EXPECT_EQ(back.degree(), 2);
}

TEST(JsonTest, PolyFormRoundTrip)
{
    std::mt19937_64 rng(1);
    auto f = sampling::random_polyform(1, 3, 2, rng);
    EXPECT_EQ(polyform_from_json(polyform_to_json(f)), f);
}

TEST(JsonTest, MalformedChainReportsLine)
{
    TempDir tmp;
    auto p = tmp.write("bad.json", "{\n  \"ambient\": 2,\n  \"degree\": 1,\n  \"vertices\": [[0, 0], [1, 0]\n}\n");
    std::string where = parse_error_where([&] { load_chain(p); });
    EXPECT_EQ(where, p.string() + ":5");
}

TEST(JsonTest, FieldErrorsNameThePath)
{
    EXPECT_EQ(parse_error_where([] { chain_from_json(nlohmann::json::parse(R"({"degree": 1})")); }), "chain.ambient");
    EXPECT_EQ(parse_error_where([] { chain_from_json(nlohmann::json::parse(R"({"ambient": 2, "degree": 5})")); }),
              "chain.degree");
    EXPECT_EQ(parse_error_where([] { box_from_json(nlohmann::json::parse(R"({"lower": [0, 0], "upper": [1]})")); }),
              "box.upper");
}

TEST(JsonTest, UnknownMotionFamilyRejected)
{
    auto j = nlohmann::json::parse(R"({"family": "wobble", "params": {}})");
    EXPECT_THROW(motion_from_json(j), ParseError);
}

TEST(ScenarioTest, BundledSuiteLoads)
{
    auto all = load_scenarios("scenarios/suite.json");
    EXPECT_EQ(all.size(), 9u);
    for (const auto& s : all) EXPECT_NO_THROW(detail::validate(s)) << s.name;
}

TEST(ScenarioTest, InlineScenarioAndDefaults)
{
    TempDir tmp;
    auto p = tmp.write("one.json", std::string(R"({"name": "inline", "chain": )") + kSegment + "}");
    auto all = load_scenarios(p);
    ASSERT_EQ(all.size(), 1u);
    EXPECT_EQ(all[0].name, "inline");
    EXPECT_EQ(all[0].seed, 42u);
    EXPECT_FALSE(all[0].motion);
    EXPECT_EQ(all[0].epsilons.size(), 3u);
}

TEST(ScenarioTest, DuplicateNamesRejected)
{
    TempDir tmp;
    std::string s = std::string(R"({"name": "dup", "chain": )") + kSegment + "}";
    auto p = tmp.write("suite.json", "{\"scenarios\": [" + s + ", " + s + "]}");
    EXPECT_THROW(load_scenarios(p), ParseError);
}

TEST(ScenarioTest, MissingChainFileNamed)
{
    TempDir tmp;
    auto p = tmp.write("s.json", R"({"name": "x", "chain": "nowhere.json"})");
    EXPECT_EQ(parse_error_where([&] { load_scenarios(p); }), p.string() + ".chain");
}

TEST(ScenarioTest, TauOutsideMotionWindowRejected)
{
    TempDir tmp;
    auto p = tmp.write("s.json", std::string(R"({"name": "x", "tau": 3.0,
      "motion": {"family": "rotation", "params": {"center": [0.5, 0.5], "omega": 1, "r0": 1, "r1": 2}},
      "chain": )") + kSegment + "}");
    EXPECT_THROW(load_scenarios(p), ParseError);
}

TEST(ScenarioTest, ChainOffTheComplexRejected)
{
    TempDir tmp;
    auto p = tmp.write("s.json", R"({"name": "x", "complex": {"box": {"lower": [0, 0], "upper": [1, 1]}, "resolution": 3},
      "chain": {"ambient": 2, "degree": 1, "vertices": [[0.1, 0], [1, 0]], "simplices": [{"vertices": [0, 1], "multiplicity": 1}]}})");
    auto all = load_scenarios(p);
    EXPECT_THROW(detail::validate(all[0]), ParseError);
}

TEST(ReportTest, RulesAndToleranceScale)
{
    RunOptions o;
    o.tolerance_scale = 2.0;
    Report r("s", o);
    EXPECT_TRUE(r.match("m", 1.0, 1.0 + 1.5e-6, 1e-6).pass);
    EXPECT_FALSE(r.match("m", 1.0, 1.0 + 3e-6, 1e-6).pass);
    EXPECT_FALSE(r.bound("b", 2.0, 1.0, 0.0).pass);
    EXPECT_TRUE(r.bound("b", 1.0, 2.0, 0.0).pass);
    EXPECT_TRUE(r.at_least("o", 1.95, 1.9).pass);
    EXPECT_FALSE(r.at_least("o", std::nan(""), 1.9).pass);
    EXPECT_TRUE(r.info("i", 1e9).pass);
    r.fail("f", "boom");
    EXPECT_FALSE(r.rows().back().pass);
}

TEST(ReportTest, LoglogSlopeIgnoresRoundOffFloor)
{
    std::vector<double> h{1e-1, 1e-2, 1e-3}, e{1e-2, 1e-4, 1e-6};
    EXPECT_NEAR(detail::loglog_slope(h, e), 2.0, 1e-12);
}

TEST(RunTest, VerifyIsDeterministicAcrossWorkers)
{
    auto all = load_scenarios("scenarios/suite.json");
    std::vector<ScenarioConfig> some;
    for (const auto& s : all)
        if (s.name == "static" || s.name == "shear" || s.name == "points") some.push_back(s);
    ASSERT_EQ(some.size(), 3u);
    RunOptions o;
    o.seed = 7;
    auto job = [&](const ScenarioConfig& s) { return run_verify(s, o); };
    auto a = run_parallel<std::vector<ReportRow>>(some, 1, job);
    auto b = run_parallel<std::vector<ReportRow>>(some, 3, job);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        ASSERT_EQ(a[i].size(), b[i].size());
        for (std::size_t k = 0; k < a[i].size(); ++k) EXPECT_EQ(report_fields(a[i][k]), report_fields(b[i][k]));
    }
}

TEST(RunTest, CsvWriterQuotesFields)
{
    TempDir tmp;
    write_csv(tmp.path() / "out.csv", {"a", "b"}, {{"1", "x,y"}});
    std::ifstream in(tmp.path() / "out.csv");
    std::string header, line;
    std::getline(in, header);
    std::getline(in, line);
    EXPECT_EQ(header, "a,b");
    EXPECT_EQ(line, "1,\"x,y\"");
}
