#include "noonsim/schedule.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <sstream>

namespace noonsim {

namespace {

std::int64_t checked_mul(std::int64_t a, std::int64_t b, const char* what) {
    std::int64_t out = 0;
    if (__builtin_mul_overflow(a, b, &out)) {
        throw Error(std::string("integer overflow computing ") + what);
    }
    return out;
}

std::int64_t checked_add(std::int64_t a, std::int64_t b, const char* what) {
    std::int64_t out = 0;
    if (__builtin_add_overflow(a, b, &out)) {
        throw Error(std::string("integer overflow computing ") + what);
    }
    return out;
}

std::int64_t parse_int_token(std::string_view token, const std::string& context) {
    std::int64_t value = 0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || token.empty()) {
        throw ParseError("schedule literal: bad integer '" + std::string(token) + "' in " + context);
    }
    return value;
}

}  // namespace

Schedule::Schedule(std::vector<ScheduleStep> steps) : steps_(std::move(steps)) {
    if (steps_.empty()) {
        throw Error("schedule must contain at least one step");
    }
    for (const auto& step : steps_) {
        if (step.n_particles < 1) {
            throw Error("schedule step requires n_particles >= 1");
        }
        if (step.replicas < 1) {
            throw Error("schedule step requires replicas >= 1");
        }
        total_particles_ = checked_add(
            total_particles_, checked_mul(step.n_particles, step.replicas, "total particles"),
            "total particles");
        total_measurements_ = checked_add(total_measurements_, step.replicas, "total measurements");
    }
}

Schedule Schedule::single(std::int64_t n_total) {
    if (n_total < 1) {
        throw Error("single schedule requires n_total >= 1");
    }
    return Schedule({{n_total, 1}});
}

Schedule Schedule::arithmetic(std::int64_t p, std::int64_t n_tilde) {
    if (p < 1 || n_tilde < 1) {
        throw Error("arithmetic schedule requires p >= 1 and n_tilde >= 1");
    }
    std::vector<ScheduleStep> steps;
    steps.reserve(static_cast<std::size_t>(p));
    for (std::int64_t k = 1; k <= p; ++k) {
        steps.push_back({checked_mul(k, n_tilde, "arithmetic step size"), 1});
    }
    return Schedule(std::move(steps));
}

Schedule Schedule::geometric(std::int64_t p, std::int64_t r, std::int64_t m) {
    if (p < 1 || r < 1 || m < 1) {
        throw Error("geometric schedule requires p >= 1, r >= 1, m >= 1");
    }
    std::vector<ScheduleStep> steps;
    steps.reserve(static_cast<std::size_t>(p));
    std::int64_t size = 1;
    for (std::int64_t k = 0; k < p; ++k) {
        steps.push_back({size, m});
        if (k + 1 < p) {
            size = checked_mul(size, r, "geometric step size r^k");
        }
    }
    return Schedule(std::move(steps));
}

Schedule Schedule::fixed(std::int64_t n_tilde, std::int64_t m) {
    if (n_tilde < 1 || m < 1) {
        throw Error("fixed schedule requires n_tilde >= 1 and m >= 1");
    }
    return Schedule({{n_tilde, m}});
}

Schedule Schedule::ion_sequence(std::int64_t n_max, std::int64_t m) {
    if (n_max < 1 || m < 1) {
        throw Error("ion sequence requires n_max >= 1 and m >= 1");
    }
    std::vector<ScheduleStep> steps;
    steps.reserve(static_cast<std::size_t>(n_max));
    for (std::int64_t n = 1; n <= n_max; ++n) {
        steps.push_back({n, m});
    }
    return Schedule(std::move(steps));
}

std::int64_t Schedule::max_particles() const {
    std::int64_t best = 0;
    for (const auto& step : steps_) {
        best = std::max(best, step.n_particles);
    }
    return best;
}

namespace {

// key=value[,key=value...] with required/optional keys; rejects unknowns and duplicates.
std::map<std::string, std::int64_t> parse_kv(const std::string& body, const std::string& literal) {
    std::map<std::string, std::int64_t> out;
    std::size_t pos = 0;
    while (pos < body.size()) {
        std::size_t comma = body.find(',', pos);
        if (comma == std::string::npos) comma = body.size();
        const std::string item = body.substr(pos, comma - pos);
        const std::size_t eq = item.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ParseError("schedule literal: expected key=value, got '" + item + "' in '" + literal + "'");
        }
        const std::string key = item.substr(0, eq);
        const std::int64_t value = parse_int_token(item.substr(eq + 1), "'" + literal + "'");
        if (!out.emplace(key, value).second) {
            throw ParseError("schedule literal: duplicate key '" + key + "' in '" + literal + "'");
        }
        pos = comma + 1;
    }
    return out;
}

std::int64_t take(std::map<std::string, std::int64_t>& kv, const std::string& key,
                  std::int64_t fallback, bool required, const std::string& literal) {
    auto it = kv.find(key);
    if (it == kv.end()) {
        if (required) {
            throw ParseError("schedule literal: missing required key '" + key + "' in '" + literal + "'");
        }
        return fallback;
    }
    const std::int64_t value = it->second;
    kv.erase(it);
    return value;
}

void reject_leftovers(const std::map<std::string, std::int64_t>& kv, const std::string& literal) {
    if (!kv.empty()) {
        throw ParseError("schedule literal: unknown key '" + kv.begin()->first + "' in '" + literal + "'");
    }
}

}  // namespace

Schedule parse_schedule(const std::string& literal) {
    const std::size_t colon = literal.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 >= literal.size()) {
        throw ParseError("schedule literal: expected 'family:args', got '" + literal + "'");
    }
    const std::string family = literal.substr(0, colon);
    const std::string body = literal.substr(colon + 1);

    if (family == "single") {
        return Schedule::single(parse_int_token(body, "'" + literal + "'"));
    }
    if (family == "steps") {
        std::vector<ScheduleStep> steps;
        std::size_t pos = 0;
        while (pos < body.size()) {
            std::size_t comma = body.find(',', pos);
            if (comma == std::string::npos) comma = body.size();
            const std::string item = body.substr(pos, comma - pos);
            const std::size_t x = item.find('x');
            if (x == std::string::npos) {
                throw ParseError("schedule literal: expected NxM, got '" + item + "' in '" + literal + "'");
            }
            steps.push_back({parse_int_token(item.substr(0, x), "'" + literal + "'"),
                             parse_int_token(item.substr(x + 1), "'" + literal + "'")});
            pos = comma + 1;
        }
        return Schedule(std::move(steps));
    }

    auto kv = parse_kv(body, literal);
    if (family == "arith") {
        const auto p = take(kv, "p", 0, true, literal);
        const auto nt = take(kv, "nt", 1, false, literal);
        reject_leftovers(kv, literal);
        return Schedule::arithmetic(p, nt);
    }
    if (family == "geom") {
        const auto p = take(kv, "p", 0, true, literal);
        const auto r = take(kv, "r", 2, false, literal);
        const auto m = take(kv, "m", 1, false, literal);
        reject_leftovers(kv, literal);
        return Schedule::geometric(p, r, m);
    }
    if (family == "fixed") {
        const auto n = take(kv, "n", 0, true, literal);
        const auto m = take(kv, "m", 0, true, literal);
        reject_leftovers(kv, literal);
        return Schedule::fixed(n, m);
    }
    if (family == "ions") {
        const auto nmax = take(kv, "nmax", 6, false, literal);
        const auto m = take(kv, "m", 0, true, literal);
        reject_leftovers(kv, literal);
        return Schedule::ion_sequence(nmax, m);
    }
    throw ParseError("schedule literal: unknown family '" + family + "' in '" + literal + "'");
}

std::string format_schedule(const Schedule& schedule) {
    const auto& steps = schedule.steps();
    std::ostringstream out;

    if (steps.size() == 1) {
        if (steps[0].replicas == 1) {
            out << "single:" << steps[0].n_particles;
        } else {
            out << "fixed:n=" << steps[0].n_particles << ",m=" << steps[0].replicas;
        }
        return out.str();
    }

    const std::int64_t m = steps[0].replicas;
    const bool same_m = std::all_of(steps.begin(), steps.end(),
                                    [&](const ScheduleStep& s) { return s.replicas == m; });

    if (same_m && steps[0].n_particles >= 1) {
        // arithmetic: nt, 2nt, ..., p*nt with one shot each
        const std::int64_t nt = steps[0].n_particles;
        bool arith = m == 1;
        for (std::size_t k = 0; arith && k < steps.size(); ++k) {
            arith = steps[k].n_particles == static_cast<std::int64_t>(k + 1) * nt;
        }
        if (arith) {
            out << "arith:p=" << steps.size() << ",nt=" << nt;
            return out.str();
        }
        // ion sequence: 1..nmax each repeated m
        bool ions = steps[0].n_particles == 1;
        for (std::size_t k = 0; ions && k < steps.size(); ++k) {
            ions = steps[k].n_particles == static_cast<std::int64_t>(k + 1);
        }
        if (ions) {
            out << "ions:nmax=" << steps.size() << ",m=" << m;
            return out.str();
        }
        // geometric with integer ratio
        if (steps[0].n_particles == 1 && steps.size() >= 2 && steps[1].n_particles >= 1 &&
            steps[1].n_particles % steps[0].n_particles == 0) {
            const std::int64_t r = steps[1].n_particles;
            bool geom = r >= 1;
            std::int64_t expect = 1;
            for (std::size_t k = 0; geom && k < steps.size(); ++k) {
                geom = steps[k].n_particles == expect;
                if (k + 1 < steps.size()) expect *= r;
            }
            if (geom) {
                out << "geom:p=" << steps.size() << ",r=" << r << ",m=" << m;
                return out.str();
            }
        }
    }

    out << "steps:";
    for (std::size_t k = 0; k < steps.size(); ++k) {
        if (k) out << ",";
        out << steps[k].n_particles << "x" << steps[k].replicas;
    }
    return out.str();
}

}  // namespace noonsim
