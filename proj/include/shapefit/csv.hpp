#pragma once

#include "shapefit/design.hpp"

#include <optional>
#include <string>
#include <vector>

namespace shapefit {

/// Reads columns t,y[,sigma]; optional header; rows may be unsorted.
/// Missing sigma falls back to the first-difference noise estimate.
SampleSet ingest_csv(const std::string& path);

void write_curve_csv(const std::string& path, const std::vector<double>& grid,
                     const std::vector<double>& values,
                     const std::optional<std::vector<double>>& sd = std::nullopt);

struct LongSeries {
    std::string name;
    const std::vector<double>* t;
    const std::vector<double>* value;
};
void write_long_csv(const std::string& path, const std::vector<LongSeries>& series);

}  // namespace shapefit
