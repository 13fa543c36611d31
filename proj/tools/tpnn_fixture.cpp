// Writes the reference models as manifest + weights pairs:
//   tpnn_fixture <dir> [name...]
// Names: xor, lenet5, f1tenth, flat. Without names, all of them.

#include "tpnn/ingest.hpp"
#include "tpnn/zoo.hpp"

#include <functional>
#include <iostream>
#include <map>

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: tpnn_fixture <dir> [xor|lenet5|f1tenth|flat ...]\n";
        return 2;
    }
    const std::map<std::string, std::function<tpnn::Network()>> models = {
        {"xor", [] { return tpnn::zoo::xor_network(); }},
        {"lenet5", [] { return tpnn::zoo::lenet5(1); }},
        {"f1tenth", [] { return tpnn::zoo::f1tenth_standin(2); }},
        {"flat", [] { return tpnn::zoo::flatten_only(); }},
    };
    std::vector<std::string> names(argv + 2, argv + argc);
    if (names.empty()) {
        for (const auto& [name, make] : models) {
            names.push_back(name);
        }
    }
    for (const auto& name : names) {
        const auto it = models.find(name);
        if (it == models.end()) {
            std::cerr << "tpnn_fixture: unknown model '" << name << "'\n";
            return 2;
        }
        try {
            std::cout << tpnn::save_model_files(it->second(), argv[1]).string() << "\n";
        } catch (const tpnn::Error& e) {
            std::cerr << "tpnn_fixture: " << e.what() << "\n";
            return 3;
        }
    }
    return 0;
}
