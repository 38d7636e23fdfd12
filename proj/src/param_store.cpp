#include "sslv3/param_store.hpp"

namespace sslv3 {

const char* param_group_name(ParamGroup g) {
    switch (g) {
        case ParamGroup::backbone: return "backbone";
        case ParamGroup::vqa: return "vqa";
        case ParamGroup::cls: return "cls";
    }
    return "?";
}

TensorPtr ParameterStore::add(const std::string& name, ParamGroup group, TensorPtr t) {
    if (entries_.count(name)) {
        throw ValueError("parameter '" + name + "' registered twice");
    }
    t->requires_grad = true;
    t->ensure_grad();
    entries_[name] = {t, group};
    return t;
}

TensorPtr ParameterStore::get(const std::string& name) const { return entry(name).tensor; }

const ParamEntry& ParameterStore::entry(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw ValueError("unknown parameter '" + name + "'");
    return it->second;
}

void ParameterStore::zero_grad() {
    for (auto& [name, e] : entries_) e.tensor->zero_grad();
}

std::vector<std::string> ParameterStore::names(ParamGroup group) const {
    std::vector<std::string> out;
    for (const auto& [name, e] : entries_) {
        if (e.group == group) out.push_back(name);
    }
    return out;
}

int64_t ParameterStore::scalar_count() const {
    int64_t n = 0;
    for (const auto& [name, e] : entries_) n += e.tensor->size();
    return n;
}

}  // namespace sslv3
