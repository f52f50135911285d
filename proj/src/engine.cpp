#include "rfon/engines.hpp"

namespace rfon {

const Lattice& engine_lattice(const Engine& engine) {
  return std::visit([](const auto& e) -> const Lattice& { return e.lattice(); }, engine);
}

const ModelParams& engine_params(const Engine& engine) {
  return std::visit([](const auto& e) -> const ModelParams& { return e.params(); }, engine);
}

std::string engine_name(const Engine& engine) {
  struct Visitor {
    std::string operator()(const ExactEnumEngine&) const { return "exact_enum"; }
    std::string operator()(const GaussianEngine&) const { return "gaussian_analytic"; }
    std::string operator()(const McmcEngine&) const { return "mcmc"; }
  };
  return std::visit(Visitor{}, engine);
}

std::unique_ptr<GibbsState> gibbs_state(const Engine& engine, const DisorderSample& disorder,
                                        std::uint64_t sampler_seed) {
  struct Visitor {
    const DisorderSample& disorder;
    std::uint64_t seed;
    std::unique_ptr<GibbsState> operator()(const ExactEnumEngine& e) const {
      return std::make_unique<ExactState>(e, disorder);
    }
    std::unique_ptr<GibbsState> operator()(const GaussianEngine& e) const {
      return std::make_unique<GaussianState>(e, disorder);
    }
    std::unique_ptr<GibbsState> operator()(const McmcEngine& e) const {
      auto run = e.run(disorder, seed);
      return std::make_unique<SampledState>(std::move(*run.state));
    }
  };
  return std::visit(Visitor{disorder, sampler_seed}, engine);
}

}  // namespace rfon
