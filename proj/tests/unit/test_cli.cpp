#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "presym/cli.hpp"

namespace fs = std::filesystem;

namespace {

const std::string data_dir = PRESYM_DATA_DIR;
const std::string golden_dir = PRESYM_GOLDEN_DIR;

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args)
{
  args.insert(args.begin(), "presym");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Result r;
  r.code = presym::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& path)
{
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name, const std::string& contents)
{
  fs::path dir = fs::current_path() / "cli_scratch";
  fs::create_directories(dir);
  fs::path p = dir / name;
  std::ofstream(p) << contents;
  return p;
}

const std::string mechanical = data_dir + "/affine_mechanical.json";
const std::string pin = "x*(x-1)*q_z*u2 != 0";

}  // namespace

TEST_CASE("derive matches the golden trees")
{
  Result a = run({"derive", mechanical, "--p0", "0", "--pin", pin, "--format", "structured"});
  CHECK(a.code == 0);
  CHECK(a.out == slurp(golden_dir + "/derive_abnormal_pinned.json"));
  auto doc = nlohmann::json::parse(a.out);
  CHECK(doc["leaves"].size() == 1);

  Result n = run({"derive", mechanical, "--p0", "-1", "--format", "structured"});
  CHECK(n.code == 0);
  CHECK(n.out == slurp(golden_dir + "/derive_normal.json"));
  auto nd = nlohmann::json::parse(n.out);
  REQUIRE(nd["leaves"].size() == 1);
  CHECK(nd["branches"][0]["depth"] == 0);
}

TEST_CASE("derive reports input and budget problems through the exit code")
{
  fs::path bad = scratch("too_many_controls.json", R"({"states":["x"],"controls":["u","w"],
    "vector_field":["u+w"],"cost":"u^2","time":{"fixed":[0,1]}})");
  Result r = run({"derive", bad.string()});
  CHECK(r.code == presym::cli::InputError);
  CHECK(r.err.find("dimension mismatch") != std::string::npos);

  CHECK(run({"derive", data_dir + "/nonexistent.json"}).code == presym::cli::InputError);
  CHECK(run({"derive", mechanical, "--pin", "x = 0"}).code == presym::cli::InputError);
  CHECK(run({"derive", mechanical, "--p0", "2"}).code == presym::cli::InputError);
  CHECK(run({}).code == presym::cli::InputError);
  CHECK(run({"--help"}).code == presym::cli::Success);

  Result b = run({"derive", mechanical, "--p0", "0", "--pin", pin, "--max-steps", "2"});
  CHECK(b.code == presym::cli::BudgetExhausted);
  CHECK_FALSE(b.err.empty());
}

TEST_CASE("classify text output")
{
  Result si = run({"classify", data_dir + "/single_integrator.json"});
  CHECK(si.code == 0);
  CHECK(si.out.find("no abnormal extremals\n") != std::string::npos);
  CHECK(si.out.find("strictness: all-normal-strict\n") != std::string::npos);

  Result ft = run({"classify", data_dir + "/single_integrator_free.json"});
  CHECK(ft.code == 0);
  CHECK(ft.out.find("no abnormal extremals\n") != std::string::npos);
  CHECK(ft.out.find("free time: only zero covectors in the abnormal final submanifold: yes\n") != std::string::npos);
}

TEST_CASE("classify with the strict abnormal curve")
{
  Result r = run({"classify", mechanical, "--pin", pin, "--curve", data_dir + "/gamma_curve.json", "--format",
                  "structured"});
  REQUIRE(r.code == 0);
  auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["abnormal_exists"] == "yes");
  const auto& c = doc["curve"];
  CHECK(c["exists"] == "no");
  CHECK(c["in_abnormal_image"] == "yes");
  CHECK(c["strict_abnormal"] == "yes");
  CHECK(c["contradiction_factored"].dump().find("v_y0 - 1") != std::string::npos);

  Result one = run({"classify", mechanical, "--pin", pin, "--curve", data_dir + "/gamma_curve_general.json", "--param",
                    "v_y0=1", "--format", "structured"});
  REQUIRE(one.code == 0);
  CHECK(nlohmann::json::parse(one.out)["curve"]["exists"] == "yes");
}

TEST_CASE("report renders a saved structured verdict")
{
  fs::path saved = fs::current_path() / "cli_scratch" / "verdict.json";
  fs::create_directories(saved.parent_path());
  Result w = run({"classify", data_dir + "/single_integrator.json", "--format", "structured", "--out", saved.string()});
  CHECK(w.code == 0);
  CHECK(w.out.empty());
  Result text = run({"classify", data_dir + "/single_integrator.json"});
  Result rendered = run({"report", saved.string()});
  CHECK(rendered.code == 0);
  CHECK(rendered.out == text.out);
  fs::path junk = scratch("junk.json", "{");
  CHECK(run({"report", junk.string()}).code == presym::cli::InputError);
}

TEST_CASE("integrate the pinned leaf")
{
  std::string init = data_dir + "/affine_mechanical_init.json";
  fs::path csv = fs::current_path() / "cli_scratch" / "mechanical.csv";
  fs::create_directories(csv.parent_path());
  Result r = run({"integrate", mechanical, "--pin", pin, "--init", init, "--format", "structured", "--out", csv.string()});
  CHECK(r.code == presym::cli::NumericFailure);
  auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["numeric_pass"] == true);
  CHECK(doc["endpoints"]["pass"] == false);
  const auto& fin = doc["final"];
  const std::vector<std::pair<std::string, double>> expected{{"x", 2}, {"y", 1}, {"z", 0}, {"v_x", 0}, {"v_y", 0}, {"v_z", 4}};
  for (const auto& [name, value] : expected) CHECK(std::abs(fin[name].get<double>() - value) <= 1e-8);
  CHECK(std::abs(fin["u2"].get<double>() - 2) <= 1e-12);
  std::string dump = slurp(csv);
  CHECK(dump.rfind("t,x,y,z,v_x,v_y,v_z,p_x,p_y,p_z,q_x,q_y,q_z,u1,u2,residual,h_drift\n", 0) == 0);

  Result ok = run({"integrate", mechanical, "--pin", pin, "--init", init, "--param", "v_y0=0"});
  CHECK(ok.code == presym::cli::Success);
}

TEST_CASE("integrate failures")
{
  std::string init = data_dir + "/affine_mechanical_init.json";
  fs::path off = scratch("off_branch_init.json", R"({"constants":{"p_z0":1,"q_z0":1},"parameters":{"v_y0":2},
    "values":{"x":2.001,"y":0,"z":0,"v_x":0,"v_y":2,"v_z":-4,"p_z":1,"q_z":1,"u2":2},"hold_controls":["u2"]})");
  Result r = run({"integrate", mechanical, "--pin", pin, "--init", off.string()});
  CHECK(r.code == presym::cli::NumericFailure);
  CHECK(r.err.find("x - 2") != std::string::npos);

  CHECK(run({"integrate", mechanical, "--pin", pin, "--init", init, "--leaf", "99"}).code == presym::cli::InputError);
  CHECK(run({"integrate", mechanical, "--pin", pin}).code == presym::cli::InputError);
  CHECK(run({"integrate", mechanical, "--pin", pin, "--init", init, "--h", "0"}).code == presym::cli::InputError);
  CHECK(run({"integrate", mechanical, "--pin", pin, "--init", init, "--param", "v_y0=abc"}).code ==
        presym::cli::InputError);
}

TEST_CASE("integrating a constant branch dumps constant rows")
{
  fs::path still = scratch("still.json", R"({"states":["x","y"],"controls":["u"],"vector_field":["0","0"],
    "cost":"u^2/2","time":{"fixed":[0,1]}})");
  fs::path init = scratch("still_init.json", R"({"values":{"x":0.3,"y":-2.5,"lam_x":1.25,"lam_y":7}})");
  fs::path csv = fs::current_path() / "cli_scratch" / "still.csv";
  Result r = run({"integrate", still.string(), "--p0", "-1", "--init", init.string(), "--h", "0.125", "--out", csv.string()});
  CHECK(r.code == presym::cli::Success);
  std::istringstream rows(slurp(csv));
  std::string header, line, first;
  std::getline(rows, header);
  int n = 0;
  while (std::getline(rows, line)) {
    std::string values = line.substr(line.find(','));
    if (n == 0) first = values;
    CHECK(values == first);
    ++n;
  }
  CHECK(n == 9);
}

TEST_CASE("outputs are deterministic")
{
  std::vector<std::vector<std::string>> commands{
      {"derive", mechanical, "--format", "structured"},
      {"classify", mechanical, "--pin", pin, "--curve", data_dir + "/gamma_curve.json", "--format", "structured"},
      {"integrate", mechanical, "--pin", pin, "--init", data_dir + "/affine_mechanical_init.json", "--format",
       "structured"}};
  for (const auto& c : commands) {
    Result a = run(c);
    Result b = run(c);
    CHECK(a.code == b.code);
    CHECK(a.out == b.out);
    CHECK(a.err == b.err);
  }
}
