#pragma once

#include <map>
#include <string>
#include <vector>

#include "sslv3/tensor.hpp"

namespace sslv3 {

/// Parameter group tags. `vqa` and `cls` make the quality-head and
/// classifier-head parameter sets addressable for the coupling checks.
enum class ParamGroup : uint8_t { backbone = 0, vqa = 1, cls = 2 };

const char* param_group_name(ParamGroup g);

struct ParamEntry {
    TensorPtr tensor;
    ParamGroup group;
};

/// Named, grouped trainable tensors. Iteration order is the name order, which
/// keeps the optimizer and the checkpoint writer deterministic.
class ParameterStore {
  public:
    /// Registers a tensor; duplicate names are an error. Marks it trainable
    /// and allocates its gradient.
    TensorPtr add(const std::string& name, ParamGroup group, TensorPtr t);

    TensorPtr get(const std::string& name) const;
    bool has(const std::string& name) const { return entries_.count(name) > 0; }
    const ParamEntry& entry(const std::string& name) const;

    void zero_grad();

    const std::map<std::string, ParamEntry>& entries() const { return entries_; }
    std::vector<std::string> names(ParamGroup group) const;

    size_t tensor_count() const { return entries_.size(); }
    int64_t scalar_count() const;

  private:
    std::map<std::string, ParamEntry> entries_;
};

}  // namespace sslv3
