// Exercises the installed command-line tool end to end: output files and the
// exit-code contract (0 ok, 2 validation, 4 I/O). Receives the binary path
// as argv[1] from the test harness.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {
int failures = 0;

void expect(bool cond, const std::string& what) {
  if (!cond) {
    std::printf("[FAIL] %s\n", what.c_str());
    ++failures;
  } else {
    std::printf("[ok]   %s\n", what.c_str());
  }
}

int run(const std::string& cmd) {
  int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}
}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::printf("usage: test_cli_exit <path-to-cli>\n");
    return 2;
  }
  std::string cli = argv[1];
  fs::path dir = fs::temp_directory_path() / "rigidlab_cli_test";
  fs::create_directories(dir);

  expect(run(cli + " build B --out " + dir.string() + " > /dev/null") == 0, "build B exits 0");
  expect(fs::exists(dir / "B.obj") && fs::exists(dir / "B.json"), "build B writes OBJ and JSON");

  expect(run(cli + " build Pn --n 10 --out " + dir.string() + " > /dev/null") == 0,
         "build Pn exits 0");
  expect(fs::exists(dir / "Pn10.obj"), "build Pn writes the mesh");

  expect(run(cli + " export P --out " + dir.string() + " > /dev/null") == 0, "export P exits 0");
  expect(fs::exists(dir / "P_pattern.json"), "export writes the pattern");

  expect(run(cli + " angles --grid 32 --out " + dir.string() + " > /dev/null") == 0,
         "angles exits 0");
  {
    std::ifstream in(dir / "angles.csv");
    std::string header;
    std::getline(in, header);
    expect(header == "r,alpha,beta,gamma", "angles.csv header is r,alpha,beta,gamma");
  }

  // validation failures exit 2
  {
    fs::path bad = dir / "bad.cfg";
    std::ofstream(bad) << "t = 1.0\n";  // violates t > s
    expect(run(cli + " build B --config " + bad.string() + " --out " + dir.string() +
               " 2> /dev/null") == 2,
           "config with t <= s exits 2");
  }
  expect(run(cli + " build NOPE --out " + dir.string() + " 2> /dev/null") == 2,
         "unknown target exits 2");
  // unreadable config exits 4
  expect(run(cli + " build B --config " + (dir / "missing.cfg").string() + " 2> /dev/null") == 4,
         "missing config exits 4");

  if (failures == 0) std::printf("cli exit-code contract: all ok\n");
  return failures == 0 ? 0 : 1;
}
