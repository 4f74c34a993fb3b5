#include "genperf/traceparse.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <tuple>

#include <json.hpp>

#include "embedded.hpp"
#include "genperf/csv.hpp"
#include "genperf/error.hpp"
#include "genperf/spec_io.hpp"

namespace genperf {

using nlohmann::json;

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::string id_string(const json& v, const std::string& field, std::size_t index) {
    if (v.is_string()) {
        return v.get<std::string>();
    }
    if (v.is_number_integer()) {
        return std::to_string(v.get<std::int64_t>());
    }
    if (v.is_number_unsigned()) {
        return std::to_string(v.get<std::uint64_t>());
    }
    throw ParseError("event " + std::to_string(index) + ": '" + field + "' must be a string or integer");
}

Nanos to_nanos(const json& v, const std::string& field, std::size_t index) {
    if (!v.is_number()) {
        throw ParseError("event " + std::to_string(index) + ": '" + field + "' must be a number");
    }
    const double micros = v.get<double>();
    if (micros < 0) {
        throw ValidationError("event " + std::to_string(index) + ": '" + field + "' must be non-negative");
    }
    return static_cast<Nanos>(std::llround(micros * 1000.0));
}

bool retained_phase(char ph) {
    return ph == 'X' || ph == 'B' || ph == 'E' || ph == 's' || ph == 't' || ph == 'f';
}

// Writes pid/tid back as integers when that is how they would have been read.
json id_json(const std::string& s) {
    if (!s.empty() && s.size() < 19 && std::all_of(s.begin() + (s[0] == '-' ? 1 : 0), s.end(), ::isdigit) &&
        s != "-") {
        std::int64_t v = std::stoll(s);
        if (std::to_string(v) == s) {
            return v;
        }
    }
    return s;
}

// Total order on spans; the innermost of several containing spans is the one with the
// latest start, then the earliest end.
auto span_key(const AnnotationSpan& s) {
    return std::tie(s.process_id, s.thread_id, s.start, s.end, s.label, s.category);
}

bool span_less(const AnnotationSpan& a, const AnnotationSpan& b) {
    // start ascending, end descending, so that walking backwards visits inner spans first.
    if (a.start != b.start) return a.start < b.start;
    if (a.end != b.end) return a.end > b.end;
    if (a.label != b.label) return a.label < b.label;
    return a.category < b.category;
}

class SpanIndex {
public:
    explicit SpanIndex(std::vector<AnnotationSpan> spans) {
        for (auto& s : spans) {
            all_.push_back(s);
            by_thread_[{s.process_id, s.thread_id}].push_back(std::move(s));
        }
        for (auto& [key, list] : by_thread_) {
            std::sort(list.begin(), list.end(), span_less);
        }
        std::sort(all_.begin(), all_.end(), span_less);
    }

    const AnnotationSpan* innermost(const std::string& pid, const std::string& tid, Nanos t) const {
        auto it = by_thread_.find({pid, tid});
        if (it == by_thread_.end()) {
            return nullptr;
        }
        return search(it->second, t);
    }

    const AnnotationSpan* innermost_any_thread(Nanos t) const { return search(all_, t); }

private:
    static const AnnotationSpan* search(const std::vector<AnnotationSpan>& list, Nanos t) {
        auto upper = std::upper_bound(list.begin(), list.end(), t,
                                      [](Nanos value, const AnnotationSpan& s) { return value < s.start; });
        const AnnotationSpan* best = nullptr;
        for (auto it = upper; it != list.begin();) {
            --it;
            if (it->end < t) {
                continue;
            }
            if (best == nullptr) {
                best = &*it;
                continue;
            }
            if (it->start < best->start) {
                break;
            }
        }
        return best;
    }

    std::map<std::pair<std::string, std::string>, std::vector<AnnotationSpan>> by_thread_;
    std::vector<AnnotationSpan> all_;
};

struct LaunchPoint {
    std::string pid;
    std::string tid;
    Nanos ts = 0;
};

auto event_key(const TraceEvent& e) {
    return std::tie(e.timestamp, e.name, e.process_id, e.thread_id, e.duration, e.phase);
}

double fraction_of(Nanos part, Nanos total) {
    return total > 0 ? static_cast<double>(part) / static_cast<double>(total) : 0.0;
}

void fill_fractions(OperatorBreakdown& b) {
    b.total_time = 0;
    for (const auto& c : b.categories) {
        b.total_time += c.time;
    }
    for (auto& c : b.categories) {
        c.fraction = fraction_of(c.time, b.total_time);
    }
}

double kendall_tau_b(const std::vector<double>& x, const std::vector<double>& y) {
    long concordant = 0, discordant = 0, tied_x = 0, tied_y = 0, pairs = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = i + 1; j < x.size(); ++j) {
            ++pairs;
            const double dx = x[i] - x[j];
            const double dy = y[i] - y[j];
            if (dx == 0) ++tied_x;
            if (dy == 0) ++tied_y;
            if (dx == 0 || dy == 0) continue;
            ((dx > 0) == (dy > 0) ? concordant : discordant) += 1;
        }
    }
    const double denom = std::sqrt(static_cast<double>(pairs - tied_x) * static_cast<double>(pairs - tied_y));
    if (denom == 0.0) {
        return tied_x == pairs && tied_y == pairs ? 1.0 : 0.0;
    }
    return static_cast<double>(concordant - discordant) / denom;
}

}  // namespace

std::vector<TraceEvent> parse_trace_text(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ParseError("malformed trace document at byte " + std::to_string(e.byte) + ": " + e.what());
    }
    const json* list = &doc;
    if (doc.is_object()) {
        auto it = doc.find("traceEvents");
        if (it == doc.end() || !it->is_array()) {
            throw ParseError("trace document object has no 'traceEvents' array");
        }
        list = &*it;
    } else if (!doc.is_array()) {
        throw ParseError("trace document must be an event array or an object with 'traceEvents'");
    }

    std::vector<TraceEvent> events;
    for (std::size_t i = 0; i < list->size(); ++i) {
        const json& e = (*list)[i];
        const std::string where = "event " + std::to_string(i);
        if (!e.is_object()) {
            throw ParseError(where + " is not an object");
        }
        auto name = e.find("name");
        auto ph = e.find("ph");
        if (name == e.end() || !name->is_string()) {
            throw ParseError(where + " is missing required field 'name'");
        }
        if (ph == e.end() || !ph->is_string() || ph->get<std::string>().size() != 1) {
            throw ParseError(where + " is missing required field 'ph'");
        }
        const char phase = ph->get<std::string>()[0];
        if (phase == 'M') {
            continue;
        }
        auto ts = e.find("ts");
        if (ts == e.end()) {
            throw ParseError(where + " is missing required field 'ts'");
        }
        const Nanos timestamp = to_nanos(*ts, "ts", i);
        if (!retained_phase(phase)) {
            continue;
        }
        TraceEvent ev;
        ev.name = name->get<std::string>();
        ev.phase = phase;
        ev.timestamp = timestamp;
        if (auto dur = e.find("dur"); dur != e.end()) {
            ev.duration = to_nanos(*dur, "dur", i);
        }
        if (auto pid = e.find("pid"); pid != e.end()) {
            ev.process_id = id_string(*pid, "pid", i);
        }
        if (auto tid = e.find("tid"); tid != e.end()) {
            ev.thread_id = id_string(*tid, "tid", i);
        }
        if (auto cat = e.find("cat"); cat != e.end() && cat->is_string()) {
            ev.category = cat->get<std::string>();
        }
        if (auto args = e.find("args"); args != e.end() && args->is_object()) {
            if (auto corr = args->find("correlation"); corr != args->end() && corr->is_number_integer()) {
                ev.correlation = corr->get<std::int64_t>();
            }
        }
        if (phase == 's' || phase == 't' || phase == 'f') {
            if (auto id = e.find("id"); id != e.end()) {
                ev.flow_id = id_string(*id, "id", i);
            }
        }
        events.push_back(std::move(ev));
    }
    return events;
}

std::vector<TraceEvent> parse_trace(const std::filesystem::path& path) {
    return parse_trace_text(read_file(path));
}

std::string write_trace(const std::vector<TraceEvent>& events) {
    json list = json::array();
    for (const auto& ev : events) {
        json e = json::object();
        e["name"] = ev.name;
        e["ph"] = std::string(1, ev.phase);
        e["ts"] = static_cast<double>(ev.timestamp) / 1000.0;
        if (ev.phase == 'X' || ev.duration != 0) {
            e["dur"] = static_cast<double>(ev.duration) / 1000.0;
        }
        e["pid"] = id_json(ev.process_id);
        e["tid"] = id_json(ev.thread_id);
        if (ev.category) {
            e["cat"] = *ev.category;
        }
        if (ev.correlation) {
            e["args"] = json{{"correlation", *ev.correlation}};
        }
        if (ev.flow_id) {
            e["id"] = id_json(*ev.flow_id);
        }
        list.push_back(std::move(e));
    }
    return json{{"traceEvents", list}}.dump(1) + "\n";
}

std::optional<OpCategory> CategoryRules::match(std::string_view label) const {
    const std::string l = lower(label);
    for (const auto& rule : rules) {
        if (l.find(lower(rule.pattern)) != std::string::npos) {
            return rule.category;
        }
    }
    return std::nullopt;
}

CategoryRules parse_rules(std::string_view text) {
    CategoryRules out;
    std::size_t line_no = 0;
    for (const auto& row : parse_csv(text)) {
        ++line_no;
        if (row.empty() || (row.size() == 1 && row[0].empty())) {
            continue;
        }
        if (!row[0].empty() && row[0][0] == '#') {
            continue;
        }
        if (row.size() != 2) {
            throw ParseError("rules line " + std::to_string(line_no) + ": expected 'pattern,category'");
        }
        if (row[0] == "pattern" && row[1] == "category") {
            continue;
        }
        auto category = parse_category(row[1]);
        if (!category) {
            throw ParseError("rules line " + std::to_string(line_no) + ": unknown category '" + row[1] + "'");
        }
        if (row[0].empty()) {
            throw ParseError("rules line " + std::to_string(line_no) + ": empty pattern");
        }
        out.rules.push_back({row[0], *category});
    }
    return out;
}

CategoryRules load_rules(const std::filesystem::path& path) {
    return parse_rules(read_file(path));
}

CategoryRules default_rules() {
    return parse_rules(detail::embedded_default_rules());
}

bool is_kernel(const TraceEvent& e) {
    return e.phase == 'X' && e.category && lower(*e.category) == "kernel";
}

bool is_launch(const TraceEvent& e) {
    return !is_kernel(e) && e.correlation.has_value() && (e.phase == 'X' || e.phase == 'B');
}

std::vector<AnnotationSpan> annotation_spans(const std::vector<TraceEvent>& events, const CategoryRules& rules) {
    std::vector<AnnotationSpan> spans;
    std::map<std::pair<std::string, std::string>, std::vector<const TraceEvent*>> begin_end;
    for (const auto& e : events) {
        if (is_kernel(e) || is_launch(e)) {
            continue;
        }
        if (e.phase == 'X') {
            if (auto cat = rules.match(e.name)) {
                spans.push_back({e.name, *cat, e.timestamp, e.timestamp + e.duration, e.process_id, e.thread_id});
            }
        } else if (e.phase == 'B' || e.phase == 'E') {
            begin_end[{e.process_id, e.thread_id}].push_back(&e);
        }
    }
    for (auto& [thread, list] : begin_end) {
        // Ends sort ahead of begins at equal timestamps.
        std::sort(list.begin(), list.end(), [](const TraceEvent* a, const TraceEvent* b) {
            if (a->timestamp != b->timestamp) return a->timestamp < b->timestamp;
            if (a->phase != b->phase) return a->phase == 'E';
            return a->name < b->name;
        });
        std::vector<const TraceEvent*> open;
        for (const TraceEvent* e : list) {
            if (e->phase == 'B') {
                open.push_back(e);
            } else if (!open.empty()) {
                const TraceEvent* b = open.back();
                open.pop_back();
                if (auto cat = rules.match(b->name)) {
                    spans.push_back({b->name, *cat, b->timestamp, e->timestamp, b->process_id, b->thread_id});
                }
            }
        }
    }
    std::sort(spans.begin(), spans.end(),
              [](const AnnotationSpan& a, const AnnotationSpan& b) { return span_key(a) < span_key(b); });
    return spans;
}

OperatorBreakdown link_kernels(const std::vector<TraceEvent>& events, const CategoryRules& rules) {
    std::map<std::int64_t, const TraceEvent*> launches;
    std::map<std::string, const TraceEvent*> flow_starts;
    std::vector<const TraceEvent*> flow_ends;
    std::vector<const TraceEvent*> kernels;
    for (const auto& e : events) {
        if (is_kernel(e)) {
            kernels.push_back(&e);
        } else if (is_launch(e)) {
            auto [it, inserted] = launches.emplace(*e.correlation, &e);
            if (!inserted && event_key(e) < event_key(*it->second)) {
                it->second = &e;
            }
        } else if (e.phase == 's' && e.flow_id) {
            auto [it, inserted] = flow_starts.emplace(*e.flow_id, &e);
            if (!inserted && event_key(e) < event_key(*it->second)) {
                it->second = &e;
            }
        } else if (e.phase == 'f' && e.flow_id) {
            flow_ends.push_back(&e);
        }
    }
    std::sort(flow_ends.begin(), flow_ends.end(), [](const TraceEvent* a, const TraceEvent* b) {
        return std::tie(a->timestamp, *a->flow_id, a->process_id, a->thread_id) <
               std::tie(b->timestamp, *b->flow_id, b->process_id, b->thread_id);
    });

    const SpanIndex spans(annotation_spans(events, rules));

    auto launch_point = [&](const TraceEvent& k) -> std::optional<LaunchPoint> {
        if (k.correlation) {
            if (auto it = launches.find(*k.correlation); it != launches.end()) {
                return LaunchPoint{it->second->process_id, it->second->thread_id, it->second->timestamp};
            }
        }
        for (const TraceEvent* f : flow_ends) {
            if (f->process_id == k.process_id && f->thread_id == k.thread_id && f->timestamp >= k.timestamp &&
                f->timestamp <= k.timestamp + k.duration) {
                if (auto it = flow_starts.find(*f->flow_id); it != flow_starts.end()) {
                    return LaunchPoint{it->second->process_id, it->second->thread_id, it->second->timestamp};
                }
            }
        }
        return std::nullopt;
    };

    OperatorBreakdown out;
    Nanos first = 0, last = 0;
    for (const TraceEvent* k : kernels) {
        const AnnotationSpan* span = nullptr;
        if (auto point = launch_point(*k)) {
            span = spans.innermost(point->pid, point->tid, point->ts);
        } else {
            span = spans.innermost_any_thread(k->timestamp);
        }
        OpCategory category = OpCategory::other;
        if (span != nullptr) {
            category = span->category;
        } else if (auto by_name = rules.match(k->name)) {
            category = *by_name;
            ++out.name_matched;
        } else {
            ++out.unattributed;
        }
        out[category].time += k->duration;
        if (out.kernel_count == 0) {
            first = k->timestamp;
            last = k->timestamp + k->duration;
        } else {
            first = std::min(first, k->timestamp);
            last = std::max(last, k->timestamp + k->duration);
        }
        ++out.kernel_count;
    }
    out.wall_span = last - first;
    fill_fractions(out);
    return out;
}

OperatorBreakdown breakdown_from_times(const std::array<Nanos, kCategories.size()>& times) {
    OperatorBreakdown out;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < 0) {
            throw DomainError("category times must be non-negative");
        }
        out.categories[i].time = times[i];
    }
    fill_fractions(out);
    out.wall_span = out.total_time;
    return out;
}

BreakdownComparison compare_breakdown(const OperatorBreakdown& measured, const CostBreakdown& modeled,
                                      const HardwareSpec& hw) {
    BreakdownComparison out;
    std::array<double, kCategories.size()> modeled_time{};
    double modeled_total = 0.0;
    for (OpCategory c : kCategories) {
        const double t = estimate_time(modeled[c], hw);
        modeled_time[static_cast<std::size_t>(c)] = t;
        modeled_total += t;
    }
    std::vector<double> measured_fractions, modeled_fractions;
    for (OpCategory c : kCategories) {
        CategoryComparison row;
        row.category = c;
        row.measured_fraction = measured[c].fraction;
        row.modeled_fraction = modeled_total > 0 ? modeled_time[static_cast<std::size_t>(c)] / modeled_total : 0.0;
        row.delta = row.measured_fraction - row.modeled_fraction;
        row.relative_delta = row.modeled_fraction > 0 ? row.delta / row.modeled_fraction : std::nan("");
        measured_fractions.push_back(row.measured_fraction);
        modeled_fractions.push_back(row.modeled_fraction);
        out.categories.push_back(row);
    }
    out.rank_agreement = kendall_tau_b(measured_fractions, modeled_fractions);
    out.modeled_total_seconds = modeled_total;
    out.measured_total_seconds = static_cast<double>(measured.total_time) * 1e-9;
    return out;
}

TraceSpeedup attention_speedup_from_traces(const OperatorBreakdown& baseline, const OperatorBreakdown& optimized) {
    const Nanos base_attn = baseline[OpCategory::attention].time;
    const Nanos opt_attn = optimized[OpCategory::attention].time;
    if (opt_attn == 0) {
        throw DomainError("optimized run has zero attention time");
    }
    if (optimized.total_time == 0 || baseline.total_time == 0) {
        throw DomainError("breakdowns must have non-zero total time");
    }
    TraceSpeedup s;
    s.module_speedup = static_cast<double>(base_attn) / static_cast<double>(opt_attn);
    s.end_to_end = static_cast<double>(baseline.total_time) / static_cast<double>(optimized.total_time);
    s.attention_fraction = fraction_of(base_attn, baseline.total_time);
    s.amdahl_end_to_end =
        1.0 / ((1.0 - s.attention_fraction) + s.attention_fraction / s.module_speedup);
    s.amdahl_consistent = std::abs(s.end_to_end - s.amdahl_end_to_end) <= 1e-9;
    return s;
}

std::string format_micros(Nanos ns) {
    const bool negative = ns < 0;
    const std::uint64_t mag = negative ? static_cast<std::uint64_t>(-(ns + 1)) + 1 : static_cast<std::uint64_t>(ns);
    std::string out = (negative ? "-" : "") + std::to_string(mag / 1000);
    std::uint64_t frac = mag % 1000;
    if (frac != 0) {
        std::string digits = std::to_string(frac);
        digits.insert(0, 3 - digits.size(), '0');
        while (digits.back() == '0') {
            digits.pop_back();
        }
        out += "." + digits;
    }
    return out;
}

std::string breakdown_csv(const OperatorBreakdown& breakdown) {
    CsvWriter csv({"category", "microseconds", "fraction"});
    for (OpCategory c : kCategories) {
        csv.row({to_string(c), format_micros(breakdown[c].time), format_double(breakdown[c].fraction)});
    }
    return csv.str();
}

}  // namespace genperf
