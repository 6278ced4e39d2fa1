#pragma once

#include <cstdint>
#include <vector>

#include "smell/corpus.hpp"
#include "smell/eval.hpp"
#include "smell/features.hpp"
#include "smell/models.hpp"
#include "smell/resample.hpp"

namespace smell {

struct PipelineOptions {
  bool with_code = false;  // append the code segment to the comment text
  bool use_smote = true;
  int smote_k = 5;
  TokenizerOptions tokenizer;
};

/// Everything produced by one train/evaluate round.
struct FoldOutcome {
  TrainedModel model;
  Vocabulary vocabulary;
  ResamplePlan plan;  // empty when SMOTE is off
  EvalReport report;
};

/// Fits the vocabulary on `train` only, vectorises both sides, oversamples
/// the training rows with SMOTE and evaluates on the untouched test rows.
/// Labels are encoded with `encoding`; `smote_seed` drives the resampler.
FoldOutcome train_and_evaluate(const ModelSpec& spec, const Dataset& train, const Dataset& test,
                               const LabelEncoding& encoding, const PipelineOptions& options,
                               std::uint64_t smote_seed);

/// Single stratified split (test_fraction of every class held out).
FoldOutcome holdout_evaluate(const ModelSpec& spec, const Dataset& d, double test_fraction, std::uint64_t seed,
                             const PipelineOptions& options = {});

struct CrossValidation {
  std::vector<EvalReport> folds;
  std::vector<ResamplePlan> plans;
  double mean_mcc = 0.0;
  double mean_accuracy = 0.0;
};

/// Stratified k-fold; vectoriser and SMOTE are refit inside every fold.
CrossValidation cross_validate(const ModelSpec& spec, const Dataset& d, std::size_t k, std::uint64_t seed,
                               const PipelineOptions& options = {});

}  // namespace smell
