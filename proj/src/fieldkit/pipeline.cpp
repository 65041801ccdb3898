#include "fieldkit/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <optional>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "fieldkit/error.hpp"

namespace fieldkit::pipeline {

using nlohmann::json;

const FilterSpec& PipelineSpec::filter(std::string_view name) const {
  for (const auto& f : filters) {
    if (f.name == name) return f;
  }
  throw Error(ErrorKind::InvalidArgument, "no filter named '" + std::string(name) + "'");
}

namespace {

std::vector<std::string> string_list(const json& j, const char* key) {
  std::vector<std::string> out;
  if (!j.contains(key)) return out;
  for (const auto& v : j.at(key)) out.push_back(v.get<std::string>());
  return out;
}

}  // namespace

PipelineSpec parse_pipeline(std::string_view document) {
  PipelineSpec spec;
  try {
    const json doc = json::parse(document);
    spec.source_slots = string_list(doc, "source_slots");
    if (doc.contains("workers")) spec.workers = doc.at("workers").get<int>();
    for (const auto& f : doc.at("filters")) {
      FilterSpec fs;
      fs.name = f.at("name").get<std::string>();
      fs.inputs = string_list(f, "inputs");
      fs.outputs = string_list(f, "outputs");
      fs.divider = f.value("divider", 1);
      fs.sleep_ms = f.value("sleep_ms", 0.0);
      spec.filters.push_back(std::move(fs));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("pipeline document: ") + e.what());
  }
  validate(spec);
  return spec;
}

std::string to_json(const PipelineSpec& spec) {
  json doc;
  doc["source_slots"] = spec.source_slots;
  doc["filters"] = json::array();
  for (const auto& f : spec.filters) {
    json jf{{"name", f.name}, {"inputs", f.inputs}, {"outputs", f.outputs}, {"divider", f.divider}};
    if (f.sleep_ms > 0.0) jf["sleep_ms"] = f.sleep_ms;
    doc["filters"].push_back(jf);
  }
  if (spec.workers > 0) doc["workers"] = spec.workers;
  return doc.dump(2);
}

void validate(const PipelineSpec& spec) {
  if (spec.workers < 0) throw Error(ErrorKind::InvalidArgument, "workers must be >= 0");
  std::set<std::string> names;
  std::map<std::string, std::string> producer;
  for (const auto& s : spec.source_slots) {
    if (!producer.emplace(s, "").second) throw Error(ErrorKind::DuplicateProducer, "source slot '" + s + "' listed twice");
  }
  for (const auto& f : spec.filters) {
    if (f.name.empty()) throw Error(ErrorKind::InvalidArgument, "filter name must not be empty");
    if (!names.insert(f.name).second) throw Error(ErrorKind::InvalidArgument, "duplicate filter name '" + f.name + "'");
    if (f.divider < 1) throw Error(ErrorKind::InvalidArgument, "filter '" + f.name + "' has divider < 1");
    if (f.sleep_ms < 0.0) throw Error(ErrorKind::InvalidArgument, "filter '" + f.name + "' has negative sleep_ms");
    for (const auto& out : f.outputs) {
      if (std::find(f.inputs.begin(), f.inputs.end(), out) != f.inputs.end()) {
        throw Error(ErrorKind::Cycle, "cycle: " + f.name + " -> " + f.name + " (slot '" + out + "')");
      }
      const auto [it, fresh] = producer.emplace(out, f.name);
      if (!fresh) {
        const std::string who = it->second.empty() ? "the source" : "'" + it->second + "'";
        throw Error(ErrorKind::DuplicateProducer,
                    "slot '" + out + "' produced by both " + who + " and '" + f.name + "'");
      }
    }
  }
  for (const auto& f : spec.filters) {
    for (const auto& in : f.inputs) {
      if (!producer.count(in)) {
        throw Error(ErrorKind::UnknownSlot, "filter '" + f.name + "' consumes unknown slot '" + in + "'");
      }
    }
  }

  // Depth-first search over filter -> consumer edges, in name order.
  std::map<std::string, std::vector<std::string>> consumers;
  for (const auto& f : spec.filters) {
    std::set<std::string> ups;
    for (const auto& in : f.inputs) {
      if (!producer[in].empty()) ups.insert(producer[in]);
    }
    for (const auto& u : ups) consumers[u].push_back(f.name);
  }
  std::map<std::string, int> state;  // 0 new, 1 on stack, 2 done
  std::vector<std::string> stack;
  std::function<void(const std::string&)> visit = [&](const std::string& n) {
    state[n] = 1;
    stack.push_back(n);
    auto next = consumers[n];
    std::sort(next.begin(), next.end());
    for (const auto& m : next) {
      if (state[m] == 1) {
        std::string path;
        auto from = std::find(stack.begin(), stack.end(), m);
        for (auto it = from; it != stack.end(); ++it) path += *it + " -> ";
        throw Error(ErrorKind::Cycle, "cycle: " + path + m);
      }
      if (state[m] == 0) visit(m);
    }
    stack.pop_back();
    state[n] = 2;
  };
  for (const auto& n : names) {
    if (state[n] == 0) visit(n);
  }
}

BatchPlan compute_batches(const PipelineSpec& spec) {
  std::set<std::string> ready(spec.source_slots.begin(), spec.source_slots.end());
  std::vector<const FilterSpec*> pending;
  for (const auto& f : spec.filters) pending.push_back(&f);
  BatchPlan plan;
  while (!pending.empty()) {
    std::vector<const FilterSpec*> batch;
    std::vector<const FilterSpec*> rest;
    for (const auto* f : pending) {
      const bool runnable = std::all_of(f->inputs.begin(), f->inputs.end(), [&](const auto& s) { return ready.count(s) > 0; });
      (runnable ? batch : rest).push_back(f);
    }
    if (batch.empty()) throw Error(ErrorKind::Cycle, "pipeline has unsatisfiable dependencies");
    std::vector<std::string> names;
    for (const auto* f : batch) {
      names.push_back(f->name);
      ready.insert(f->outputs.begin(), f->outputs.end());
    }
    std::sort(names.begin(), names.end());
    plan.batches.push_back(std::move(names));
    pending = std::move(rest);
  }
  return plan;
}

SlotValue SlotStore::get(const std::string& slot) const {
  const auto it = values_.find(slot);
  return it == values_.end() ? nullptr : it->second;
}

void SlotStore::set(const std::string& slot, SlotValue value) { values_[slot] = std::move(value); }

FilterIO::FilterIO(const FilterSpec& spec, const SlotStore& store, std::uint64_t frame)
    : spec_(spec), store_(store), frame_(frame) {}

SlotValue FilterIO::input(const std::string& slot) const {
  if (std::find(spec_.inputs.begin(), spec_.inputs.end(), slot) == spec_.inputs.end()) {
    throw Error(ErrorKind::InvalidArgument, "filter '" + spec_.name + "' did not declare input '" + slot + "'");
  }
  return store_.get(slot);
}

void FilterIO::output(const std::string& slot, std::any value) {
  if (std::find(spec_.outputs.begin(), spec_.outputs.end(), slot) == spec_.outputs.end()) {
    throw Error(ErrorKind::InvalidArgument, "filter '" + spec_.name + "' did not declare output '" + slot + "'");
  }
  outputs_[slot] = std::make_shared<const std::any>(std::move(value));
}

Runner::Runner(PipelineSpec spec, std::map<std::string, Filter> registry, int workers)
    : spec_(std::move(spec)), registry_(std::move(registry)) {
  validate(spec_);
  for (const auto& f : spec_.filters) {
    if (!registry_.count(f.name)) throw Error(ErrorKind::InvalidArgument, "no implementation for filter '" + f.name + "'");
  }
  plan_ = compute_batches(spec_);
  if (workers <= 0) workers = spec_.workers;
  if (workers <= 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers_ = workers;
}

const SlotStore& Runner::run_frame(std::uint64_t frame, const std::map<std::string, std::any>& sources) {
  for (const auto& [slot, value] : sources) {
    if (std::find(spec_.source_slots.begin(), spec_.source_slots.end(), slot) == spec_.source_slots.end()) {
      throw Error(ErrorKind::UnknownSlot, "'" + slot + "' is not a source slot");
    }
    store_.set(slot, std::make_shared<const std::any>(value));
  }
  for (const auto& batch : plan_.batches) {
    std::vector<const FilterSpec*> due;
    for (const auto& name : batch) {
      const FilterSpec& f = spec_.filter(name);
      if (frame % static_cast<std::uint64_t>(f.divider) == 0) due.push_back(&f);
    }
    std::vector<std::optional<FilterIO>> io(due.size());
    std::vector<std::string> errors(due.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      for (std::size_t i = next++; i < due.size(); i = next++) {
        io[i].emplace(*due[i], store_, frame);
        ExecutionRecord rec{due[i]->name, frame, std::chrono::steady_clock::now(), {}};
        try {
          registry_.at(due[i]->name)(*io[i]);
        } catch (const std::exception& e) {
          errors[i] = e.what()[0] != '\0' ? e.what() : "unknown error";
        } catch (...) {
          errors[i] = "unknown error";
        }
        rec.finish = std::chrono::steady_clock::now();
        const std::lock_guard lock(trace_mutex_);
        trace_.push_back(std::move(rec));
      }
    };
    const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(workers_), due.size());
    if (threads <= 1) {
      work();
    } else {
      std::vector<std::thread> pool;
      for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
      for (auto& t : pool) t.join();
    }
    for (std::size_t i = 0; i < due.size(); ++i) {
      if (!errors[i].empty()) {
        throw Error(ErrorKind::FilterFailure, "filter '" + due[i]->name + "' failed: " + errors[i]);
      }
    }
    // Publish after the whole batch so nothing in a batch sees a sibling's output.
    for (auto& slot_io : io) {
      for (const auto& [slot, value] : slot_io->outputs()) store_.set(slot, value);
    }
  }
  return store_;
}

std::vector<ExecutionRecord> Runner::trace() const {
  const std::lock_guard lock(trace_mutex_);
  return trace_;
}

void Runner::clear_trace() {
  const std::lock_guard lock(trace_mutex_);
  trace_.clear();
}

namespace {

std::map<std::string, Filter> sleep_filters(const PipelineSpec& spec) {
  std::map<std::string, Filter> registry;
  for (const auto& f : spec.filters) {
    const auto delay = std::chrono::duration<double, std::milli>(f.sleep_ms);
    registry[f.name] = [delay](FilterIO& io) {
      if (delay.count() > 0.0) std::this_thread::sleep_for(delay);
      for (const auto& out : io.spec().outputs) io.output(out, io.frame());
    };
  }
  return registry;
}

double mean_frame_ms(Runner& runner, std::uint64_t frames) {
  const auto t0 = std::chrono::steady_clock::now();
  for (std::uint64_t f = 0; f < frames; ++f) runner.run_frame(f);
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / static_cast<double>(frames);
}

}  // namespace

BenchResult run_bench(const PipelineSpec& spec, std::uint64_t frames, int workers) {
  if (frames == 0) throw Error(ErrorKind::InvalidArgument, "frames must be positive");
  Runner parallel(spec, sleep_filters(spec), workers);
  Runner serial(spec, sleep_filters(spec), 1);
  BenchResult r;
  r.plan = parallel.plan();
  r.frames = frames;
  r.workers = parallel.workers();
  r.parallel_ms_per_frame = mean_frame_ms(parallel, frames);
  r.serial_ms_per_frame = mean_frame_ms(serial, frames);
  for (const auto& f : spec.filters) r.executions[f.name] = 0;
  for (const auto& rec : parallel.trace()) ++r.executions[rec.filter];
  return r;
}

}  // namespace fieldkit::pipeline
