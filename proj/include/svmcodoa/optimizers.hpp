#pragma once

#include <array>
#include <string>
#include <string_view>
#include <variant>

#include "svmcodoa/baselines/csa.hpp"
#include "svmcodoa/baselines/de.hpp"
#include "svmcodoa/baselines/ga.hpp"
#include "svmcodoa/baselines/pso.hpp"
#include "svmcodoa/codoa.hpp"
#include "svmcodoa/core.hpp"

namespace svmcodoa {

/// Any of the five optimizers, selectable by name at run time.
class AnyOptimizer {
public:
    using Variant = std::variant<Codoa, Ga, De, Csa, Pso>;

    template <Optimizer O>
    AnyOptimizer(O opt) : impl_(std::move(opt)) {}

    /// codoa | ga | de | csa | pso, with default parameters.
    static AnyOptimizer by_name(std::string_view name) {
        if (name == "codoa") return Codoa{};
        if (name == "ga") return Ga{};
        if (name == "de") return De{};
        if (name == "csa") return Csa{};
        if (name == "pso") return Pso{};
        throw ConfigError("unknown optimizer '" + std::string(name) + "' (expected codoa, ga, de, csa or pso)");
    }

    static constexpr std::array<std::string_view, 5> names() { return {"codoa", "ga", "de", "csa", "pso"}; }

    std::string_view name() const {
        return std::visit([](const auto& o) -> std::string_view { return o.name(); }, impl_);
    }

    OptimizerResult optimize(const SearchSpace& space, const RunConfig& config, const Objective& objective) const {
        return std::visit([&](const auto& o) { return o.optimize(space, config, objective); }, impl_);
    }

    const Variant& variant() const noexcept { return impl_; }

private:
    Variant impl_;
};

static_assert(Optimizer<AnyOptimizer>);

}  // namespace svmcodoa
