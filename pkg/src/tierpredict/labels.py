"""Fixed tier class order shared by every module.

Index 0 is the highest tier; wherever two classes tie, the lower index wins.
"""

CLASSES = ("A", "B", "C")
N_CLASSES = len(CLASSES)
