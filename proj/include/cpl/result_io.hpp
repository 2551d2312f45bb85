#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cpl/estimator.hpp"

namespace cpl {

inline constexpr int kResultSchemaVersion = 1;

// Everything one estimation run needs to be reported and reproduced.
struct ResultFile {
    std::string label;
    std::string data_file;
    std::string init_mode;  // "gt" | "perturbed" | "file"
    std::string weighting;  // "uniform" | "adaptive"
    std::uint64_t seed{0};
    double learning_rate{1e-3};
    std::size_t max_iterations{5000};
    std::size_t batch_size{16};
    double perturb_frac{0.0};
    std::vector<std::string> fixed_params;
    ParamVector13 ground_truth{};
    ParamVector13 init{};
    ParamVector13 estimate{};
    std::array<double, kParamCount> nmae{};
    bool converged{false};
    std::size_t iterations{0};
    double best_loss{0.0};
    std::size_t kink_iterations{0};
    std::vector<double> loss_trace;
};

void write_result(const std::filesystem::path& path, const ResultFile& result);
ResultFile read_result(const std::filesystem::path& path);

} // namespace cpl
