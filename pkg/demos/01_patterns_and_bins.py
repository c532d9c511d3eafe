"""How a protected template lands in a bin.

A binary template is scanned with a k-bit window; the most frequent window
value becomes the template's bin. With several characteristics per subject
there are three ways to combine them, shown here on a toy subject.
"""

from fbpindex import BinaryTemplate, EnrolRecord, assign_bin, extract_patterns, top_pattern

face = BinaryTemplate.from_string("1111000100")
iris = BinaryTemplate.from_string("0011011100")
k = 3

for name, t in (("face", face), ("iris", iris)):
    pl = extract_patterns(t, k)
    listing = ", ".join(f"{p}x{c}" for p, c in pl)
    print(f"{name:5s} {t}  ->  {listing}")
    print(f"      top pattern {top_pattern(pl)}")

subject = EnrolRecord("alice", {"face": face, "iris": iris})
print()
for strategy in ("feature", "ranked", "xor"):
    print(f"{strategy:8s} bin = {assign_bin(subject, strategy, k, ['face', 'iris'])}")

# ranked and xor do not care about characteristic order; concatenation does,
# since windows straddle the boundary between the two templates
print()
for strategy in ("feature", "ranked", "xor"):
    a = assign_bin(subject, strategy, k, ["face", "iris"])
    b = assign_bin(subject, strategy, k, ["iris", "face"])
    print(f"{strategy:8s} face-iris {a}  iris-face {b}")
