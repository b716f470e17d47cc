"""Build the committed exam fixtures and their recorded transports.

Three original security-themed question sets (40, 10, 25 questions) and,
for each, a recorded response fixture engineered so that exactly 33, 8,
and 18 answers are correct (success rates 82.5%, 80.0%, 72.0%). Replies
cycle through varied phrasings to exercise answer extraction. Outputs to
tests/fixtures/: exam_{a,b,c}.json and exam_{a,b,c}_replies.json
"""

import json
import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from hunt.assistant import messages_digest  # noqa: E402
from hunt.exams import ExamFixture, question_prompt  # noqa: E402

FIX = os.path.join(os.path.dirname(__file__), "..", "tests", "fixtures")

# (stem, [correct choice, distractor, distractor, distractor])
BANK = [
    ("Which port does HTTPS use by default?",
     ["443", "80", "22", "8080"]),
    ("Which port does SSH use by default?",
     ["22", "21", "23", "443"]),
    ("Which protocol resolves hostnames to IP addresses?",
     ["DNS", "DHCP", "ARP", "SMTP"]),
    ("Which protocol maps IP addresses to MAC addresses on a LAN?",
     ["ARP", "DNS", "ICMP", "BGP"]),
    ("What does a SYN flood primarily exhaust on the target?",
     ["Half-open connection state", "Disk space", "DNS cache entries",
      "TLS session tickets"]),
    ("A smurf attack amplifies traffic using which protocol?",
     ["ICMP", "SMTP", "FTP", "LDAP"]),
    ("Which attack sends overlapping IP fragments to crash a host?",
     ["Teardrop", "Phishing", "SQL injection", "Credential stuffing"]),
    ("A land attack sets the source address equal to what?",
     ["The destination address", "A broadcast address",
      "A multicast group", "A loopback route"]),
    ("Port scanning is primarily used for what purpose?",
     ["Service discovery", "Payload encryption", "Log rotation",
      "Certificate pinning"]),
    ("Which tool is best known for network port scanning?",
     ["Nmap", "Wireshark", "Grep", "Ansible"]),
    ("What does brute-forcing a login primarily exploit?",
     ["Weak passwords", "Buffer overflows", "Race conditions",
      "Integer overflows"]),
    ("A buffer overflow most directly corrupts what?",
     ["Adjacent process memory", "DNS zone files", "Router ACLs",
      "Browser cookies"]),
    ("What is the main goal of a rootkit?",
     ["Hide attacker presence", "Encrypt user files for ransom",
      "Send spam email", "Mine cryptocurrency openly"]),
    ("Which control best mitigates volumetric DDoS attacks?",
     ["Upstream traffic scrubbing", "Stronger password policy",
      "Disk encryption", "Code signing"]),
    ("What does an IDS do?",
     ["Detects suspicious activity", "Assigns IP addresses",
      "Compresses backups", "Balances server load"]),
    ("How does an IPS differ from an IDS?",
     ["It can block traffic inline", "It only works on wireless networks",
      "It requires no signatures", "It runs only on endpoints"]),
    ("What is a honeypot?",
     ["A decoy system to attract attackers", "A password vault",
      "A firewall rule set", "A log aggregation service"]),
    ("What does the principle of least privilege require?",
     ["Granting only needed permissions", "Disabling all logging",
      "Sharing admin accounts", "Blocking all outbound traffic"]),
    ("What is defense in depth?",
     ["Multiple overlapping security layers", "A single strong perimeter",
      "Relying on antivirus alone", "Outsourcing all security"]),
    ("Which hash function is considered broken for signatures?",
     ["MD5", "SHA-256", "SHA-3", "BLAKE2"]),
    ("What does TLS primarily provide?",
     ["Encrypted transport", "Address allocation", "Name resolution",
      "Time synchronization"]),
    ("What is certificate pinning designed to prevent?",
     ["Man-in-the-middle with rogue certificates", "SQL injection",
      "Cross-site scripting", "Session fixation"]),
    ("Which attack tricks users into revealing credentials via fake sites?",
     ["Phishing", "Teardrop", "Smurf", "Port knocking"]),
    ("What is SQL injection?",
     ["Malicious input altering database queries",
      "Flooding a database with connections",
      "Encrypting database backups", "Replicating tables to an attacker"]),
    ("Cross-site scripting (XSS) injects malicious content into what?",
     ["Web pages viewed by other users", "DNS responses",
      "TCP checksums", "BIOS firmware"]),
    ("What does network segmentation limit?",
     ["Lateral movement", "Password length", "Packet size",
      "Certificate lifetime"]),
    ("What is the purpose of egress filtering?",
     ["Control outbound traffic", "Speed up downloads",
      "Rotate encryption keys", "Cache web content"]),
    ("Which record proves a message was not altered in transit?",
     ["Message authentication code", "Broadcast address",
      "Routing table entry", "MX record"]),
    ("What does multi-factor authentication add?",
     ["An independent second proof of identity", "A longer username",
      "A faster login path", "A shared team password"]),
    ("What is credential stuffing?",
     ["Replaying leaked username-password pairs",
      "Padding packets with random bytes",
      "Stacking VPN tunnels", "Duplicating TLS certificates"]),
    ("An R2L attack attempts what?",
     ["Unauthorized access from a remote machine",
      "Privilege escalation by a local user",
      "Mapping of open services", "Exhaustion of bandwidth"]),
    ("A U2R attack attempts what?",
     ["Escalation from user to superuser", "Remote password guessing",
      "Network-wide host discovery", "Flooding a web server"]),
    ("Which feature of network flows best indicates a flood?",
     ["Very high connection counts to one service", "Long idle times",
      "Small TTL values", "Randomized source ports only"]),
    ("What does rate limiting protect against?",
     ["Request floods and brute forcing", "Disk failures",
      "Certificate expiry", "DNS misconfiguration"]),
    ("Why keep software patched?",
     ["Known vulnerabilities get fixed", "Logs become smaller",
      "Passwords last longer", "Backups run faster"]),
    ("What is an incident response runbook for?",
     ["Predefined steps during a security incident",
      "Hardware inventory tracking", "Marketing approvals",
      "Database schema migrations"]),
    ("What does a SIEM primarily do?",
     ["Aggregates and correlates security events", "Issues certificates",
      "Hosts virtual machines", "Manages DNS zones"]),
    ("Guessing passwords against a login service is classified as what?",
     ["Remote-to-local attack", "Probe", "Denial of service",
      "Supply chain attack"]),
    ("Which backup property matters most after ransomware?",
     ["Offline immutable copies", "Colorful dashboards",
      "Deduplication ratio", "Backup window length"]),
    ("What is the role of a bastion host?",
     ["Hardened entry point for administration", "Public file mirror",
      "Mail relay", "Time server"]),
    ("Which log field is most useful to trace a source of a flood?",
     ["Source address and port", "User agent casing",
      "Response body size only", "Server hostname"]),
    ("What is ARP spoofing used for?",
     ["Intercepting LAN traffic", "Compressing frames",
      "Extending DHCP leases", "Signing firmware"]),
    ("A probe attack primarily gathers what?",
     ["Information about hosts and services", "User keystrokes",
      "Encrypted archives", "Payment records"]),
    ("What does anomaly-based detection compare traffic against?",
     ["A learned baseline of normal behavior", "A list of file hashes",
      "Vendor price lists", "Physical access logs"]),
    ("What is the main risk of telnet?",
     ["Credentials travel in cleartext", "It uses too much memory",
      "It requires IPv6", "It blocks ICMP"]),
    ("Which action contains a compromised host fastest?",
     ["Isolate it from the network", "Reboot it weekly",
      "Clear its browser cache", "Rename its hostname"]),
    ("What does a WAF protect?",
     ["Web applications", "Wireless access points", "Tape libraries",
      "Serial consoles"]),
    ("Why monitor error rates per service?",
     ["Spikes often accompany attacks or failures",
      "They determine license costs", "They set MTU size",
      "They schedule maintenance windows"]),
    ("What is privilege escalation?",
     ["Gaining higher permissions than granted",
      "Adding disk capacity", "Renewing certificates",
      "Forwarding more ports"]),
    ("What does DNS tunneling abuse?",
     ["DNS queries as a covert channel", "Zone transfer speed",
      "Reverse lookups only", "Root server locality"]),
    ("Which metric summarizes classifier performance on imbalanced data "
     "better than accuracy?",
     ["F1 score", "Uptime", "Throughput", "Latency"]),
    ("What should follow detection of a confirmed intrusion?",
     ["Containment, eradication, recovery", "Immediate disk defrag",
      "Password reuse", "Disabling all logs"]),
    ("What is lateral movement?",
     ["Attacker spreading between internal hosts",
      "Load balancing across regions", "Mirroring traffic to an IDS",
      "Rotating backup tapes"]),
    ("Which protocol carries most email between servers?",
     ["SMTP", "SNMP", "NTP", "RDP"]),
    ("What does hashing a stored password achieve?",
     ["Original password is not recoverable from the store",
      "Faster login for users", "Smaller database size",
      "Automatic password rotation"]),
]

REPLY_STYLES = [
    "The answer is {k}.",
    "{k}) {text}",
    "I believe the correct option is ({k}).",
    "Answer: {k}",
    "After considering each option, the answer is {k}.",
    "({k}) {text}",
    "{k}. {text} is correct.",
    "It should be {k}, because {text} fits best.",
    "My final answer is {k}",
    "answer - {k}",
]


def build_exam(name, n_questions, offset, rng):
    questions = []
    for i in range(n_questions):
        stem, options = BANK[(offset + i) % len(BANK)]
        order = rng.permutation(4)
        letters = ["A", "B", "C", "D"]
        choices = {letters[j]: options[order[j]] for j in range(4)}
        key = letters[int(np.nonzero(order == 0)[0][0])]
        questions.append({"id": f"{name}-{i + 1:02d}", "stem": stem,
                          "choices": choices, "key": key})
    return {"exam": name, "questions": questions}


def build_replies(exam, n_correct, rng):
    fixture = ExamFixture.from_json(exam)
    n = len(fixture.questions)
    correct_mask = np.zeros(n, dtype=bool)
    correct_mask[rng.permutation(n)[:n_correct]] = True
    replies = []
    for i, q in enumerate(fixture.questions):
        if correct_mask[i]:
            letter = q.key
        else:
            letter = rng.choice([k for k in q.choices if k != q.key])
        style = REPLY_STYLES[i % len(REPLY_STYLES)]
        text = style.format(k=letter, text=q.choices[letter])
        prompt = question_prompt(q)
        digest = messages_digest([{"role": "user", "content": prompt}])
        replies.append({"prompt_digest": digest, "response_text": text})
    return replies


def main():
    rng = np.random.default_rng(20240903)
    plans = [("exam_a", 40, 33, 0), ("exam_b", 10, 8, 40),
             ("exam_c", 25, 18, 50)]
    for name, n_q, n_ok, offset in plans:
        exam = build_exam(name, n_q, offset, rng)
        replies = build_replies(exam, n_ok, rng)
        with open(os.path.join(FIX, f"{name}.json"), "w", encoding="utf-8") as fh:
            json.dump(exam, fh, indent=1, sort_keys=True)
        with open(os.path.join(FIX, f"{name}_replies.json"), "w",
                  encoding="utf-8") as fh:
            json.dump(replies, fh, indent=1, sort_keys=True)
        print(f"{name}: {n_q} questions, engineered {n_ok} correct")


if __name__ == "__main__":
    main()
