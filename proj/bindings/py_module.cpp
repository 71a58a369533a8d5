// Python bindings for the main operations: the tag grammar, the synthetic
// oracle environment, dataset generation, reward-model training and reward
// mapping, policy sampling/merging, the optimization loop and the
// controllability benchmarks.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "moslim/bench.hpp"
#include "moslim/checkpoint.hpp"
#include "moslim/datagen.hpp"
#include "moslim/optim.hpp"
#include "moslim/policy.hpp"
#include "moslim/prefgrammar.hpp"
#include "moslim/rewardmap.hpp"
#include "moslim/rewardmodel.hpp"
#include "moslim/rng.hpp"
#include "moslim/synthenv.hpp"

namespace py = pybind11;
using namespace moslim;

namespace {

DataTypeScheme scheme_of(int id) { return DataTypeScheme::from_id(id); }

Dimension dim_of(const std::string& name) {
  const auto dim = dimension_from_tag_name(name);
  if (!dim) throw Error(ErrorCode::ConfigInvalid, "unknown dimension '" + name + "'");
  return *dim;
}

py::dict spec_to_dict(const PreferenceSpec& spec) {
  py::dict out;
  for (auto [dim, n] : spec.targets()) out[tag_name(dim)] = n;
  return out;
}

PreferenceSpec spec_from_dict(const py::dict& d) {
  PreferenceSpec spec;
  for (auto item : d) {
    spec.set(dim_of(py::cast<std::string>(item.first)), py::cast<int>(item.second));
  }
  return spec;
}

TaggedPrompt prompt_from(const py::object& spec, const std::string& body) {
  TaggedPrompt tp;
  tp.spec = spec_from_dict(py::cast<py::dict>(spec));
  tp.body = body;
  return tp;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "multi-objective preference alignment harness";

  py::register_exception<Error>(m, "MoslimError");

  // --- grammar -----------------------------------------------------------
  py::class_<TaggedPrompt>(m, "TaggedPrompt")
      .def(py::init([](const py::dict& spec, const std::string& body) {
             return prompt_from(spec, body);
           }),
           py::arg("spec"), py::arg("body"))
      .def_property_readonly("spec", [](const TaggedPrompt& tp) { return spec_to_dict(tp.spec); })
      .def_readonly("body", &TaggedPrompt::body)
      .def("__repr__", [](const TaggedPrompt& tp) {
        return "TaggedPrompt('" + serialize_prefix(tp) + "')";
      })
      .def("__eq__", [](const TaggedPrompt& a, const TaggedPrompt& b) { return a == b; });

  m.def(
      "parse_prefix",
      [](const std::string& text, int scheme) {
        return parse_prefix(text, scheme_of(scheme).levels);
      },
      py::arg("text"), py::arg("scheme") = 4,
      "Parse a '<dim n>' prefix into a TaggedPrompt under the given scheme.");
  m.def(
      "serialize_prefix",
      [](const py::object& spec, const std::string& body) {
        return serialize_prefix(prompt_from(spec, body));
      },
      py::arg("spec"), py::arg("body"));
  m.def("strip_tags", [](const std::string& text) { return strip_tags(text); }, py::arg("text"),
        "Remove the preference prefix, returning the body only.");
  m.def("scheme_levels", [](int scheme) {
    const auto s = scheme_of(scheme);
    py::dict out;
    for (Dimension dim : kAllDimensions) out[tag_name(dim)] = s.level_count(dim);
    return out;
  });

  // --- synthetic environment ---------------------------------------------
  py::class_<Vocabulary>(m, "Vocabulary")
      .def_static("standard", &Vocabulary::standard, py::arg("size") = kDefaultVocabSize)
      .def_readonly("tokens", &Vocabulary::tokens)
      .def_readonly("eos", &Vocabulary::eos)
      .def_readonly("help", &Vocabulary::help)
      .def_readonly("truth", &Vocabulary::truth)
      .def_readonly("harm", &Vocabulary::harm)
      .def("__len__", &Vocabulary::size);

  m.def(
      "oracle_score",
      [](const std::vector<int>& response, const Vocabulary& vocab) {
        const auto s = oracle_score(response, vocab);
        py::dict out;
        out["helpfulness"] = s.helpfulness;
        out["honesty"] = s.honesty;
        out["harmless"] = s.harmlessness;
        return out;
      },
      py::arg("response"), py::arg("vocab") = Vocabulary::standard(),
      "Ground-truth raw scores of a token sequence.");
  m.def(
      "sample_base_response",
      [](const std::vector<int>& prompt, std::uint64_t seed, int length, const Vocabulary& vocab) {
        return sample_base_response(prompt, seed, length, vocab);
      },
      py::arg("prompt"), py::arg("seed"), py::arg("length") = kDefaultResponseLength,
      py::arg("vocab") = Vocabulary::standard());
  m.def(
      "map_raw_to_intensity",
      [](int raw, const std::string& dim, int scheme) {
        return map_raw_to_intensity(raw, dim_of(dim), scheme_of(scheme));
      },
      py::arg("raw"), py::arg("dim"), py::arg("scheme"));

  // --- datasets ------------------------------------------------------------
  py::class_<LabeledSample>(m, "LabeledSample")
      .def_readonly("question", &LabeledSample::question)
      .def_readonly("answer", &LabeledSample::answer)
      .def_readonly("label", &LabeledSample::label);

  py::class_<RmDataset>(m, "RmDataset")
      .def_property_readonly("scheme", [](const RmDataset& ds) { return ds.scheme.id; })
      .def_readonly("samples", &RmDataset::samples)
      .def("__len__", [](const RmDataset& ds) { return ds.samples.size(); })
      .def("save", [](const RmDataset& ds, const std::string& path) {
        save_rm_dataset(ds, path, "python");
      });

  py::class_<PromptSample>(m, "PromptSample")
      .def_property_readonly("text",
                             [](const PromptSample& s) { return serialize_prefix(s.tagged); })
      .def_readonly("tagged", &PromptSample::tagged);

  py::class_<RlDataset>(m, "RlDataset")
      .def_property_readonly("scheme", [](const RlDataset& ds) { return ds.scheme.id; })
      .def_readonly("samples", &RlDataset::samples)
      .def("__len__", [](const RlDataset& ds) { return ds.samples.size(); })
      .def("save", [](const RlDataset& ds, const std::string& path) {
        save_rl_dataset(ds, path, "python");
      });

  m.def(
      "build_rm_dataset",
      [](int n, int scheme, std::uint64_t seed, const std::string& label_mode, int workers) {
        DatagenConfig cfg;
        cfg.label_mode = label_mode_from_name(label_mode);
        cfg.workers = workers;
        return build_rm_dataset(n, scheme_of(scheme), seed, Vocabulary::standard(), cfg);
      },
      py::arg("n"), py::arg("scheme") = 4, py::arg("seed") = 0, py::arg("label_mode") = "full",
      py::arg("workers") = 1);
  m.def(
      "build_rl_dataset",
      [](int n, int scheme, std::uint64_t seed, int workers) {
        DatagenConfig cfg;
        cfg.workers = workers;
        return build_rl_dataset(n, scheme_of(scheme), seed, Vocabulary::standard(), cfg);
      },
      py::arg("n"), py::arg("scheme") = 4, py::arg("seed") = 0, py::arg("workers") = 1);
  m.def("load_rm_dataset", &load_rm_dataset, py::arg("path"));
  m.def("load_rl_dataset", &load_rl_dataset, py::arg("path"));

  // --- reward model ---------------------------------------------------------
  py::class_<HeadStatistics>(m, "HeadStatistics")
      .def("mean", [](const HeadStatistics& s, const std::string& dim,
                      int intensity) { return s.mean(dim_of(dim), intensity - 1); },
           py::arg("dim"), py::arg("intensity"))
      .def("std", [](const HeadStatistics& s, const std::string& dim,
                     int intensity) { return s.stddev(dim_of(dim), intensity - 1); },
           py::arg("dim"), py::arg("intensity"))
      .def("count", [](const HeadStatistics& s, const std::string& dim,
                       int intensity) { return s.count(dim_of(dim), intensity - 1); },
           py::arg("dim"), py::arg("intensity"))
      .def("save", [](const HeadStatistics& s, const std::string& path) {
        s.save(path, "python", false);
      })
      .def_static("load", &HeadStatistics::load, py::arg("path"));

  py::class_<HeadDistribution>(m, "HeadDistribution")
      .def("probs",
           [](const HeadDistribution& d, const std::string& dim) {
             const auto* row = d.find(dim_of(dim));
             if (!row) throw Error(ErrorCode::SchemeMismatch, "no head for " + dim);
             return *row;
           },
           py::arg("dim"))
      .def("__repr__", [](const HeadDistribution& d) {
        return "HeadDistribution(heads=" + std::to_string(d.dims.size()) + ")";
      });

  py::class_<MultiHeadRewardModel>(m, "RewardModel")
      .def_property_readonly("scheme",
                             [](const MultiHeadRewardModel& rm) { return rm.scheme().id; })
      .def_property_readonly("dims",
                             [](const MultiHeadRewardModel& rm) {
                               std::vector<std::string> out;
                               for (Dimension dim : rm.dims()) out.emplace_back(tag_name(dim));
                               return out;
                             })
      .def("forward",
           [](const MultiHeadRewardModel& rm, const std::vector<int>& q, const std::vector<int>& a) {
             return rm.forward(q, a, Vocabulary::standard(rm.vocab_size()));
           },
           py::arg("question"), py::arg("answer"))
      .def("evaluate",
           [](const MultiHeadRewardModel& rm, const RmDataset& ds) {
             const auto eval = evaluate_rm(rm, ds);
             return py::make_tuple(eval.preference_accuracy, eval.intensity_accuracy);
           },
           py::arg("dataset"), "Returns (preference_accuracy, intensity_accuracy).")
      .def("save",
           [](const MultiHeadRewardModel& rm, const std::string& path) {
             Checkpoint ckpt = rm.to_checkpoint(Vocabulary::standard(rm.vocab_size()).hash());
             stamp_header(ckpt.header, "python", false);
             save_checkpoint(ckpt, path);
           })
      .def_static("load", [](const std::string& path) {
        return MultiHeadRewardModel::from_checkpoint(load_checkpoint(path));
      });

  m.def(
      "train_rm",
      [](const RmDataset& ds, double lr, int epochs, int batch_size, int hidden,
         std::uint64_t seed) {
        RmConfig cfg;
        cfg.lr = lr;
        cfg.epochs = epochs;
        cfg.batch_size = batch_size;
        cfg.hidden = hidden;
        cfg.seed = seed;
        HeadStatistics stats;
        auto model = train_rm(ds, cfg, &stats);
        return py::make_tuple(std::move(model), std::move(stats));
      },
      py::arg("dataset"), py::arg("lr") = 1e-3, py::arg("epochs") = 1, py::arg("batch_size") = 32,
      py::arg("hidden") = 0, py::arg("seed") = 0,
      "Train the multi-head reward model; returns (model, training statistics).");
  m.def("calibrate_stats", &calibrate_stats, py::arg("model"), py::arg("dataset"),
        py::arg("beta") = 0.99);
  m.def(
      "map_reward",
      [](const HeadDistribution& dist, const py::dict& spec, const HeadStatistics& stats,
         bool normalize_by_active) {
        RewardMapConfig cfg;
        cfg.normalize_by_active = normalize_by_active;
        return map_reward(dist, spec_from_dict(spec), stats, cfg).value;
      },
      py::arg("dist"), py::arg("spec"), py::arg("stats"), py::arg("normalize_by_active") = false,
      "Scalarize classification output against a preference spec.");

  // --- policy ----------------------------------------------------------------
  py::class_<Trajectory>(m, "Trajectory")
      .def_readonly("response", &Trajectory::response)
      .def_readonly("logprobs", &Trajectory::logprobs)
      .def_property_readonly("prompt", [](const Trajectory& t) { return t.tagged_prompt; });

  py::class_<PolicyModel>(m, "Policy")
      .def(py::init([](int scheme, int embed_dim, std::uint64_t seed) {
             return PolicyModel(scheme_of(scheme), Vocabulary::standard().size(), embed_dim, seed);
           }),
           py::arg("scheme") = 4, py::arg("embed_dim") = kDefaultEmbedDim, py::arg("seed") = 0)
      .def_property_readonly("scheme", [](const PolicyModel& p) { return p.scheme().id; })
      .def("sample",
           [](const PolicyModel& p, const TaggedPrompt& tp, int max_len, double temperature,
              std::uint64_t seed) {
             return p.sample(tp, Vocabulary::standard(p.vocab_size()), max_len, temperature, seed);
           },
           py::arg("prompt"), py::arg("max_len") = kDefaultResponseLength,
           py::arg("temperature") = 1.0, py::arg("seed") = 0)
      .def("logprob",
           [](const PolicyModel& p, const TaggedPrompt& tp, const std::vector<int>& response) {
             return p.logprob(tp, Vocabulary::standard(p.vocab_size()), response);
           },
           py::arg("prompt"), py::arg("response"))
      .def("save",
           [](const PolicyModel& p, const std::string& path) {
             Checkpoint ckpt = p.to_checkpoint(Vocabulary::standard(p.vocab_size()).hash());
             stamp_header(ckpt.header, "python", false);
             save_checkpoint(ckpt, path);
           })
      .def_static("load", [](const std::string& path) {
        return PolicyModel::from_checkpoint(load_checkpoint(path));
      })
      .def("params", [](const PolicyModel& p) {
        return std::vector<double>(p.params().begin(), p.params().end());
      });

  m.def(
      "merge_policies",
      [](const std::vector<PolicyModel>& policies, const std::vector<double>& lambdas,
         bool allow_unnormalized) {
        return merge_policies(policies, lambdas, allow_unnormalized);
      },
      py::arg("policies"), py::arg("lambdas"), py::arg("allow_unnormalized") = false);
  m.def(
      "kl_to_ref",
      [](const PolicyModel& policy, const PolicyModel& ref, const TaggedPrompt& tp,
         const std::vector<int>& response) {
        return kl_to_ref(policy, ref, tp, Vocabulary::standard(policy.vocab_size()), response);
      },
      py::arg("policy"), py::arg("ref"), py::arg("prompt"), py::arg("response"));
  m.def("rloo_advantages", [](const std::vector<double>& rewards) {
    return rloo_advantages(rewards);
  });

  // --- optimization loop -------------------------------------------------------
  m.def(
      "train_policy",
      [](const std::string& algo, const RlDataset& prompts, const MultiHeadRewardModel& rm,
         const HeadStatistics& stats, int steps, int batch_size, double lr, double kl_coef,
         std::uint64_t seed, int workers, int log_interval) {
        TrainPolicyConfig cfg;
        cfg.algo = AlgoConfig::defaults_for(algo_from_name(algo));
        if (batch_size > 0) cfg.algo.batch_size = batch_size;
        if (lr > 0) cfg.algo.lr = lr;
        if (kl_coef >= 0) cfg.algo.kl_coef = kl_coef;
        cfg.steps = steps;
        cfg.log_interval = log_interval;
        cfg.seed = seed;
        cfg.workers = workers;
        RewardSource source;
        source.rm = &rm;
        source.stats = &stats;
        PolicyModel policy(prompts.scheme, Vocabulary::standard().size(), kDefaultEmbedDim,
                           derive_seed(seed, 0x717ULL));
        auto summary = run_training(cfg, prompts, source, std::move(policy),
                                    Vocabulary::standard());
        py::list metrics;
        for (const auto& row : summary.metrics) {
          py::dict d;
          d["step"] = row.step;
          d["algo"] = row.algo;
          d["mean_reward"] = row.mean_reward;
          d["mean_kl"] = row.mean_kl;
          d["oracle"] = py::dict(py::arg("helpfulness") = row.oracle_helpfulness,
                                 py::arg("honesty") = row.oracle_honesty,
                                 py::arg("harmless") = row.oracle_harmless);
          metrics.append(d);
        }
        return py::make_tuple(std::move(summary.policy), metrics);
      },
      py::arg("algo"), py::arg("prompts"), py::arg("rm"), py::arg("stats"), py::arg("steps") = 200,
      py::arg("batch_size") = 0, py::arg("lr") = 0.0, py::arg("kl_coef") = -1.0,
      py::arg("seed") = 0, py::arg("workers") = 1, py::arg("log_interval") = 10,
      "Run the optimization loop; returns (policy, metrics rows).");

  // --- benchmarks ------------------------------------------------------------
  m.def(
      "intensity_sweep",
      [](const PolicyModel& policy, const std::string& dim, int scheme, int n_samples,
         std::uint64_t seed, int workers) {
        BenchConfig cfg;
        cfg.workers = workers;
        const auto result = intensity_sweep(policy, dim_of(dim), scheme_of(scheme), n_samples,
                                            seed, Vocabulary::standard(), cfg);
        py::list rows;
        for (const auto& row : result.rows) {
          rows.append(py::dict(py::arg("n") = row.n, py::arg("mean") = row.mean,
                               py::arg("std") = row.stddev, py::arg("n_samples") = row.n_samples));
        }
        return rows;
      },
      py::arg("policy"), py::arg("dim") = "helpfulness", py::arg("scheme") = 4,
      py::arg("n_samples") = 500, py::arg("seed") = 0, py::arg("workers") = 1);
  m.def(
      "pairing_eval",
      [](const PolicyModel& policy, int scheme, int n_samples, std::uint64_t seed, int workers) {
        BenchConfig cfg;
        cfg.workers = workers;
        const auto results =
            pairing_eval(policy, scheme_of(scheme), n_samples, seed, Vocabulary::standard(), cfg);
        py::list out;
        for (const auto& r : results) {
          out.append(py::dict(py::arg("pair") = py::make_tuple(tag_name(r.dim_a), tag_name(r.dim_b)),
                              py::arg("helpfulness") = r.help_mean,
                              py::arg("honesty") = r.honest_mean,
                              py::arg("harmless") = r.harmless_mean));
        }
        return out;
      },
      py::arg("policy"), py::arg("scheme") = 4, py::arg("n_samples") = 500, py::arg("seed") = 0,
      py::arg("workers") = 1);
  m.def("spearman", [](const std::vector<double>& xs, const std::vector<double>& ys) {
    return spearman(xs, ys);
  });
}
