#pragma once

#include <any>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace fieldkit::pipeline {

struct FilterSpec {
  std::string name;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  int divider = 1;
  double sleep_ms = 0.0;  ///< only used by the synthetic benchmark filters
};

struct PipelineSpec {
  std::vector<std::string> source_slots;
  std::vector<FilterSpec> filters;
  int workers = 0;  ///< 0: hardware concurrency

  const FilterSpec& filter(std::string_view name) const;
};

/// Throws Parse on malformed JSON or a wrong schema, then validates.
PipelineSpec parse_pipeline(std::string_view document);
std::string to_json(const PipelineSpec& spec);

/// Throws InvalidArgument (duplicate name, divider < 1), DuplicateProducer,
/// UnknownSlot (names filter and slot), Cycle (names the cycle).
void validate(const PipelineSpec& spec);

struct BatchPlan {
  std::vector<std::vector<std::string>> batches;
};

/// Greedy layering: a filter joins the first batch after all producers of its
/// inputs. Names within a batch are sorted.
BatchPlan compute_batches(const PipelineSpec& spec);

using SlotValue = std::shared_ptr<const std::any>;

/// Slot name to the value last published there; an absent entry is an empty slot.
class SlotStore {
 public:
  SlotValue get(const std::string& slot) const;
  void set(const std::string& slot, SlotValue value);
  bool has(const std::string& slot) const { return get(slot) != nullptr; }

 private:
  std::map<std::string, SlotValue> values_;
};

/// What one filter invocation sees: its inputs and a place for its outputs.
class FilterIO {
 public:
  FilterIO(const FilterSpec& spec, const SlotStore& store, std::uint64_t frame);

  std::uint64_t frame() const { return frame_; }
  const std::string& name() const { return spec_.name; }
  const FilterSpec& spec() const { return spec_; }
  /// Throws InvalidArgument for a slot the filter did not declare as input.
  SlotValue input(const std::string& slot) const;
  /// Throws InvalidArgument for a slot the filter did not declare as output.
  void output(const std::string& slot, std::any value);

  const std::map<std::string, SlotValue>& outputs() const { return outputs_; }

 private:
  const FilterSpec& spec_;
  const SlotStore& store_;
  std::uint64_t frame_;
  std::map<std::string, SlotValue> outputs_;
};

using Filter = std::function<void(FilterIO&)>;

struct ExecutionRecord {
  std::string filter;
  std::uint64_t frame = 0;
  std::chrono::steady_clock::time_point start;
  std::chrono::steady_clock::time_point finish;
};

class Runner {
 public:
  /// Throws InvalidArgument when the registry misses a filter.
  Runner(PipelineSpec spec, std::map<std::string, Filter> registry, int workers = 0);

  /// Runs every batch in order. A filter runs when frame % divider == 0; a
  /// skipped filter's slots keep their last values. A filter that throws
  /// stops the frame once its batch finishes (FilterFailure naming it).
  const SlotStore& run_frame(std::uint64_t frame, const std::map<std::string, std::any>& sources = {});

  const BatchPlan& plan() const { return plan_; }
  const SlotStore& slots() const { return store_; }
  int workers() const { return workers_; }
  std::vector<ExecutionRecord> trace() const;
  void clear_trace();

 private:
  PipelineSpec spec_;
  std::map<std::string, Filter> registry_;
  BatchPlan plan_;
  SlotStore store_;
  int workers_;
  mutable std::mutex trace_mutex_;
  std::vector<ExecutionRecord> trace_;
};

struct BenchResult {
  BatchPlan plan;
  std::uint64_t frames = 0;
  std::map<std::string, std::uint64_t> executions;
  double parallel_ms_per_frame = 0.0;
  double serial_ms_per_frame = 0.0;
  int workers = 0;

  double speedup() const { return parallel_ms_per_frame > 0.0 ? serial_ms_per_frame / parallel_ms_per_frame : 0.0; }
};

/// Runs the spec with filters that sleep for their sleep_ms, once with the
/// worker pool and once forced serial, and reports mean frame times.
BenchResult run_bench(const PipelineSpec& spec, std::uint64_t frames, int workers);

}  // namespace fieldkit::pipeline
