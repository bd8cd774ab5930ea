#include "perfagent/process.hpp"

#include <cerrno>
#include <csignal>
#include <cstdlib>
#include <cstring>

#include <fcntl.h>
#include <poll.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

extern char** environ;

namespace perfagent {

namespace {

using Clock = std::chrono::steady_clock;

bool is_executable(const std::filesystem::path& p) {
    struct stat st {};
    return ::stat(p.c_str(), &st) == 0 && S_ISREG(st.st_mode) && ::access(p.c_str(), X_OK) == 0;
}

class Fd {
public:
    Fd() = default;
    explicit Fd(int fd) : fd_(fd) {}
    Fd(const Fd&) = delete;
    Fd& operator=(const Fd&) = delete;
    Fd(Fd&& o) noexcept : fd_(o.release()) {}
    Fd& operator=(Fd&& o) noexcept {
        if (this != &o) {
            reset();
            fd_ = o.release();
        }
        return *this;
    }
    ~Fd() { reset(); }

    int get() const { return fd_; }
    int release() {
        int f = fd_;
        fd_ = -1;
        return f;
    }
    void reset() {
        if (fd_ >= 0) ::close(fd_);
        fd_ = -1;
    }

private:
    int fd_ = -1;
};

void make_pipe(Fd& r, Fd& w) {
    int fds[2];
    if (::pipe2(fds, O_CLOEXEC) != 0) throw Error(std::string("pipe: ") + std::strerror(errno));
    r = Fd(fds[0]);
    w = Fd(fds[1]);
}

std::vector<std::string> build_env(const std::map<std::string, std::string>& overrides) {
    std::vector<std::string> env;
    for (char** e = environ; e && *e; ++e) {
        std::string entry(*e);
        auto eq = entry.find('=');
        std::string key = entry.substr(0, eq);
        if (!overrides.contains(key)) env.push_back(std::move(entry));
    }
    for (const auto& [k, v] : overrides) env.push_back(k + "=" + v);
    return env;
}

}  // namespace

std::optional<std::filesystem::path> find_executable(const std::string& name) {
    if (name.empty()) return std::nullopt;
    if (name.find('/') != std::string::npos) {
        if (is_executable(name)) return std::filesystem::path(name);
        return std::nullopt;
    }
    const char* path = std::getenv("PATH");
    std::string p = path ? path : "/usr/local/bin:/usr/bin:/bin";
    size_t start = 0;
    while (start <= p.size()) {
        size_t end = p.find(':', start);
        if (end == std::string::npos) end = p.size();
        std::string dir = p.substr(start, end - start);
        if (dir.empty()) dir = ".";
        auto cand = std::filesystem::path(dir) / name;
        if (is_executable(cand)) return cand;
        start = end + 1;
    }
    return std::nullopt;
}

std::string shell_quote_join(const std::vector<std::string>& argv) {
    std::string out;
    for (const auto& a : argv) {
        if (!out.empty()) out += ' ';
        bool plain = !a.empty() && a.find_first_of(" \t\n'\"\\$`*?;&|<>()") == std::string::npos;
        if (plain) {
            out += a;
        } else {
            out += '\'';
            for (char c : a) {
                if (c == '\'') out += "'\\''";
                else out += c;
            }
            out += '\'';
        }
    }
    return out;
}

ProcessResult run_process(const ProcessRequest& req) {
    if (req.argv.empty()) throw Error("run_process: empty argv");
    auto exe = find_executable(req.argv[0]);
    if (!exe) throw ToolNotFound(req.argv[0]);

    Fd out_r, out_w, err_r, err_w;
    make_pipe(out_r, out_w);
    make_pipe(err_r, err_w);

    Fd in_fd;
    if (req.stdin_file) {
        in_fd = Fd(::open(req.stdin_file->c_str(), O_RDONLY | O_CLOEXEC));
        if (in_fd.get() < 0) throw Error("cannot open stdin file: " + req.stdin_file->string());
    } else {
        in_fd = Fd(::open("/dev/null", O_RDONLY | O_CLOEXEC));
    }

    std::vector<std::string> env = build_env(req.env_overrides);
    std::vector<char*> envp;
    for (auto& e : env) envp.push_back(e.data());
    envp.push_back(nullptr);

    std::vector<std::string> args = req.argv;
    std::vector<char*> argvp;
    for (auto& a : args) argvp.push_back(a.data());
    argvp.push_back(nullptr);

    std::string exe_path = exe->string();
    std::string cwd = req.working_dir ? req.working_dir->string() : std::string();

    auto t0 = Clock::now();
    pid_t pid = ::fork();
    if (pid < 0) throw Error(std::string("fork: ") + std::strerror(errno));
    if (pid == 0) {
        // Child: only async-signal-safe calls from here on.
        ::setpgid(0, 0);
        ::dup2(in_fd.get(), STDIN_FILENO);
        ::dup2(out_w.get(), STDOUT_FILENO);
        ::dup2(err_w.get(), STDERR_FILENO);
        if (!cwd.empty() && ::chdir(cwd.c_str()) != 0) ::_exit(127);
        ::execve(exe_path.c_str(), argvp.data(), envp.data());
        ::_exit(127);
    }
    out_w.reset();
    err_w.reset();
    in_fd.reset();

    ProcessResult res;
    auto deadline = t0 + std::chrono::duration_cast<Clock::duration>(req.timeout);
    pollfd fds[2] = {{out_r.get(), POLLIN, 0}, {err_r.get(), POLLIN, 0}};
    std::string* sinks[2] = {&res.out, &res.err};
    int open_streams = 2;
    char buf[65536];
    bool killed = false;
    while (open_streams > 0) {
        auto now = Clock::now();
        if (!killed && now >= deadline) {
            ::kill(-pid, SIGKILL);
            ::kill(pid, SIGKILL);
            killed = true;
            res.timed_out = true;
        }
        int wait_ms = -1;
        if (!killed) {
            auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
            wait_ms = static_cast<int>(std::max<long long>(1, std::min<long long>(left, 1000)));
        }
        int n = ::poll(fds, 2, wait_ms);
        if (n < 0) {
            if (errno == EINTR) continue;
            break;
        }
        for (int i = 0; i < 2; ++i) {
            if (fds[i].fd < 0) continue;
            if (fds[i].revents & (POLLIN | POLLHUP | POLLERR)) {
                ssize_t got = ::read(fds[i].fd, buf, sizeof buf);
                if (got > 0) {
                    sinks[i]->append(buf, static_cast<size_t>(got));
                } else if (got == 0 || (got < 0 && errno != EINTR && errno != EAGAIN)) {
                    fds[i].fd = -1;
                    --open_streams;
                }
            }
        }
    }

    int status = 0;
    while (true) {
        pid_t w = ::waitpid(pid, &status, killed ? 0 : WNOHANG);
        if (w == pid) break;
        if (w < 0 && errno != EINTR) break;
        if (w == 0) {
            if (Clock::now() >= deadline) {
                ::kill(-pid, SIGKILL);
                ::kill(pid, SIGKILL);
                killed = true;
                res.timed_out = true;
            } else {
                ::usleep(1000);
            }
        }
    }
    res.wall_s = std::chrono::duration<double>(Clock::now() - t0).count();

    if (res.timed_out) return res;
    if (WIFSIGNALED(status)) {
        res.signaled = true;
        res.term_signal = WTERMSIG(status);
    } else if (WIFEXITED(status)) {
        res.exit_code = WEXITSTATUS(status);
    }
    return res;
}

}  // namespace perfagent
