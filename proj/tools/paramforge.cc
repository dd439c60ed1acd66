#include <paramforge/cli.hh>

#include <fstream>
#include <iostream>

auto main(int argc, char * argv[]) -> int
{
    std::vector<std::string> args(argv + 1, argv + argc);
    auto result = paramforge::run(args);
    std::cerr << result.diagnostic;
    if (result.report.empty())
        return result.exit_code;

    if (result.out.empty())
        std::cout << result.report;
    else {
        std::ofstream out(result.out);
        out << result.report;
        if (! out) {
            std::cerr << "cannot write " << result.out << std::endl;
            return 2;
        }
    }
    return result.exit_code;
}
