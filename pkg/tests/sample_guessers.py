"""Guesser plugins used by the bad-copy and CLI tests."""


class Patient:
    name = "patient"

    def query(self, tup, budget, view):
        return "independent" if budget >= 40 else None


def make_patient():
    return Patient()


not_a_guesser = 3
