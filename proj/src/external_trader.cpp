#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <stdexcept>
#include <string>

#include "bundletrade/adversary.hpp"
#include "json.hpp"

namespace bundletrade {

using nlohmann::json;

ExternalTrader::ExternalTrader(const std::string& command, const ItemCatalog& catalog, double eps, double v,
                               Count d) {
    int in_pipe[2], out_pipe[2];
    if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0)
        throw std::runtime_error(std::string("external trader: pipe failed: ") + std::strerror(errno));
    pid_ = fork();
    if (pid_ < 0) throw std::runtime_error(std::string("external trader: fork failed: ") + std::strerror(errno));
    if (pid_ == 0) {
        dup2(in_pipe[0], STDIN_FILENO);
        dup2(out_pipe[1], STDOUT_FILENO);
        close(in_pipe[0]);
        close(in_pipe[1]);
        close(out_pipe[0]);
        close(out_pipe[1]);
        execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    close(in_pipe[0]);
    close(out_pipe[1]);
    to_child_ = in_pipe[1];
    from_child_ = out_pipe[0];
    // a trader that exits early must surface as an error, not kill us
    signal(SIGPIPE, SIG_IGN);

    inventory_.assign(catalog.caps.begin(), catalog.caps.end());
    json hello;
    hello["hello"] = {{"n", catalog.size()}, {"w", catalog.caps}, {"eps", eps}, {"v", v}, {"d", d}};
    send(hello.dump());
}

ExternalTrader::~ExternalTrader() {
    if (to_child_ >= 0) close(to_child_);
    if (from_child_ >= 0) close(from_child_);
    if (pid_ > 0) {
        int status = 0;
        waitpid(pid_, &status, 0);
    }
}

void ExternalTrader::send(const std::string& line) {
    std::string data = line + "\n";
    std::size_t off = 0;
    while (off < data.size()) {
        ssize_t k = write(to_child_, data.data() + off, data.size() - off);
        if (k < 0) {
            if (errno == EINTR) continue;
            throw std::runtime_error(std::string("external trader: write failed: ") + std::strerror(errno));
        }
        off += static_cast<std::size_t>(k);
    }
}

std::string ExternalTrader::receive() {
    for (;;) {
        auto nl = buffer_.find('\n');
        if (nl != std::string::npos) {
            std::string line = buffer_.substr(0, nl);
            buffer_.erase(0, nl + 1);
            return line;
        }
        char chunk[4096];
        ssize_t k = read(from_child_, chunk, sizeof chunk);
        if (k < 0) {
            if (errno == EINTR) continue;
            throw std::runtime_error(std::string("external trader: read failed: ") + std::strerror(errno));
        }
        if (k == 0) throw std::runtime_error("external trader: process closed its output");
        buffer_.append(chunk, static_cast<std::size_t>(k));
    }
}

TradeDecision ExternalTrader::exchange(EventKind kind, const Menu& menu) {
    json msg;
    msg["kind"] = std::string(to_string(kind));
    json items = json::array();
    for (const Bundle& b : menu) items.push_back({{"counts", b.counts}, {"value", b.value}});
    msg["menu"] = std::move(items);
    send(msg.dump());

    const std::string line = receive();
    json reply;
    try {
        reply = json::parse(line);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("external trader: invalid reply: ") + e.what());
    }
    TradeDecision d;
    try {
        const json& choice = reply.at("choice");
        if (!choice.is_null()) {
            d.bundle = choice.get<std::size_t>();
            if (*d.bundle >= menu.size()) throw std::runtime_error("external trader: choice outside the menu");
        }
        d.paid = reply.contains("paid") ? reply.at("paid").get<bool>() : d.bundle.has_value();
        if (reply.contains("price")) d.price = reply.at("price").get<double>();
        else if (d.bundle) d.price = menu[*d.bundle].value;
        if (!d.paid) d.price = 0.0;
        auto inv = reply.at("inventory").get<std::vector<double>>();
        if (inv.size() != inventory_.size()) throw std::runtime_error("external trader: inventory length mismatch");
        inventory_ = std::move(inv);
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("external trader: malformed reply: ") + e.what());
    }
    return d;
}

TradeDecision ExternalTrader::on_customer(const Menu& menu) { return exchange(EventKind::Customer, menu); }
TradeDecision ExternalTrader::on_supplier(const Menu& menu) { return exchange(EventKind::Supplier, menu); }

}  // namespace bundletrade
