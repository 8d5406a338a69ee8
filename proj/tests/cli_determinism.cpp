// Spawns the command line tool twice per subcommand with identical options
// and verifies byte-identical artifacts plus the documented exit codes.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

int run(const std::string& cli, const std::string& out, const std::string& args) {
    std::string cmd = "\"" + cli + "\" --out \"" + out + "\" " + args + " > /dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

bool same_tree(const fs::path& a, const fs::path& b) {
    std::size_t count = 0;
    for (const auto& entry : fs::directory_iterator(a)) {
        ++count;
        std::ifstream fa(entry.path(), std::ios::binary);
        std::ifstream fb(b / entry.path().filename(), std::ios::binary);
        if (!fa || !fb) return false;
        std::stringstream sa, sb;
        sa << fa.rdbuf();
        sb << fb.rdbuf();
        if (sa.str() != sb.str()) return false;
    }
    return count > 0;
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 3) {
        std::cerr << "usage: cli_determinism <ranklab-binary> <workdir>\n";
        return 2;
    }
    std::string cli = argv[1];
    fs::path work = argv[2];
    fs::remove_all(work);
    fs::create_directories(work);

    std::vector<std::pair<std::string, std::string>> runs = {
        {"build", "--cnu-nu 1 --cnu-base 3 build --stages 4"},
        {"correlate", "--cnu-nu 1 --cnu-base 3 correlate --n-from 0 --n-to 20"},
        {"sidon", "--cnu-nu 1 --cnu-base 3 sidon-check --upto 3"},
        {"classify", "classify --nu 5 --dmax 8"},
        {"pk", "--cnu-nu 2 --cnu-base 3 pk-diagnose --k 1 --d 1 --p 2 --decompose"},
        {"poisson", "--seed 31337 --samples 5000 poisson --event 'stage=2;floors=0;k=0' --mc"},
    };
    int rc = 0;
    for (const auto& [name, args] : runs) {
        fs::path a = work / (name + "_a");
        fs::path b = work / (name + "_b");
        if (run(cli, a.string(), args) != 0 || run(cli, b.string(), args) != 0) {
            std::cerr << "FAIL: " << name << " exited nonzero\n";
            rc = 1;
            continue;
        }
        if (!same_tree(a, b)) {
            std::cerr << "FAIL: " << name << " artifacts differ between identical runs\n";
            rc = 1;
        }
    }

    // Exit-code contract: invalid input is 1, exhausted budgets are 2.
    if (run(cli, (work / "bad").string(), "classify --nu -1") != 1) {
        std::cerr << "FAIL: invalid input should exit 1\n";
        rc = 1;
    }
    if (run(cli, (work / "collide").string(), "diverge --pair linear --h1 2 --stages 3") != 1) {
        std::cerr << "FAIL: piece collision should exit 1\n";
        rc = 1;
    }
    {
        // A schedule whose spacers never certify exactness: eps = 0 exhausts
        // the stage budget and must exit 2.
        fs::path sched = work / "chacon.schedule";
        std::ofstream out(sched);
        out << "h1 = 1\n";
        for (int j = 1; j <= 12; ++j) out << "stage " << j << ": r=3 s=0,1,0\n";
        out.close();
        std::string args = "--schedule \"" + sched.string() + "\" correlate --n 1 --eps 0";
        if (run(cli, (work / "budget").string(), args) != 2) {
            std::cerr << "FAIL: uncertifiable exact request should exit 2\n";
            rc = 1;
        }
    }
    if (rc == 0) std::cout << "cli determinism and exit codes ok\n";
    return rc;
}
