class Box:
    def __init__(self):
        self.items = []

    def add(self, item):
        # store the item
        self.items.append(item)
        return self
