"""Java documents shared by the engine, detector and mirror tests."""

PERSON = """\
public class Person {
    private String name;
    private String areaCode;
    private String number;

    public String getName() {
        return name;
    }

    public String phone() {
        return "(" + areaCode + ") " + number;
    }

    public String card() {
        return name + " " + phone();
    }
}
"""

PERSON_EXTRACTED = """\
public class Person {
    private String name;
    private final Phone telephone = new Phone();

    public String getName() {
        return name;
    }

    public String card() {
        return name + " " + telephone.phone();
    }
}

class Phone {
    String areaCode;
    String number;

    public String phone() {
        return "(" + areaCode + ") " + number;
    }
}
"""

CART = """\
public class Cart {
    private int[] prices;

    public int checkout(int discount) {
        int sum = 0;
        for (int p : prices) {
            sum += p;
        }
        return sum - discount;
    }
}
"""

CART_EXTRACTED = """\
public class Cart {
    private int[] prices;

    public int checkout(int discount) {
        int sum = subtotal();
        return sum - discount;
    }

    private int subtotal() {
        int sum = 0;
        for (int p : prices) {
            sum += p;
        }
        return sum;
    }
}
"""

LEDGER = """\
public class Ledger {
    private int limit;
    private int[] items;

    public int total(int n) {
        int t = 0;
        for (int i = 0; i < n; i++) {
            t += items[i];
        }
        if (t > limit) {
            t = limit;
        }
        return t;
    }

    public boolean isFull(int count) {
        return count >= limit;
    }

    public String label(String name) {
        String prefix = "item:";
        return prefix + name;
    }
}
"""

LEDGER_RENAMED = (
    LEDGER.replace("int t = 0;", "int sum = 0;")
    .replace("t += items[i];", "sum += items[i];")
    .replace("if (t > limit)", "if (sum > limit)")
    .replace("t = limit;", "sum = limit;")
    .replace("return t;", "return sum;")
)

CHECKER = """\
public class Checker {
    public boolean check(File file) {
        try {
            String text = read(file.getPath());
            return text.isEmpty();
        } catch (IOException e) {
            log("cannot read " + file.getPath());
            return false;
        }
    }
}
"""

# the declaration sits inside the try block but the catch block uses it too
CHECKER_OUT_OF_SCOPE = """\
public class Checker {
    public boolean check(File file) {
        try {
            String filePath = file.getPath();
            String text = read(filePath);
            return text.isEmpty();
        } catch (IOException e) {
            log("cannot read " + filePath);
            return false;
        }
    }
}
"""

CHECKER_REPAIRED = """\
public class Checker {
    public boolean check(File file) {
        String filePath = file.getPath();
        try {
            String text = read(filePath);
            return text.isEmpty();
        } catch (IOException e) {
            log("cannot read " + filePath);
            return false;
        }
    }
}
"""

BRANCHER = """\
public class Brancher {
    private Repo repo;

    public String start(String point, String prefix) {
        String qualified = prefix + point;
        Ref ref = repo.find(qualified);
        String fullName;
        if (point.startsWith("refs/")) {
            fullName = point;
        } else if (ref != null) {
            fullName = ref.getName();
        } else {
            fullName = point;
        }
        return fullName;
    }
}
"""

# the variable is inlined correctly but the if chain became a ternary without the null check
BRANCHER_UNGUARDED = """\
public class Brancher {
    private Repo repo;

    public String start(String point, String prefix) {
        Ref ref = repo.find(prefix + point);
        String fullName = point.startsWith("refs/") ? point : ref.getName();
        return fullName;
    }
}
"""

BRANCHER_INLINED = """\
public class Brancher {
    private Repo repo;

    public String start(String point, String prefix) {
        Ref ref = repo.find(prefix + point);
        String fullName;
        if (point.startsWith("refs/")) {
            fullName = point;
        } else if (ref != null) {
            fullName = ref.getName();
        } else {
            fullName = point;
        }
        return fullName;
    }
}
"""

FOLDER_FILTER = """\
public class FolderFilter {
    private String forbidden;

    public boolean accept(String path, boolean recursive) {
        if (path.startsWith(forbidden) || recursive) {
            return false;
        }
        return path.length() > 1;
    }
}
"""

FOLDER_FILTER_EXTRACTED = """\
public class FolderFilter {
    private String forbidden;

    public boolean accept(String path, boolean recursive) {
        boolean startsForbidden = path.startsWith(forbidden);
        if (startsForbidden || recursive) {
            return false;
        }
        return path.length() > 1;
    }
}
"""

MARKUP_TEST = """\
public class MarkupTest {
    private void assertSameMarkup(String markup1, String markup2) throws Exception {
        final Document expectedDocument = load(markup1);
        final Document actualDocument = load(markup2);
        compare(expectedDocument, actualDocument, markup1.length(), markup1);
    }
}
"""

PATHS = """\
public class Paths {
    private String base;

    public String relativizeAndClean(String path) {
        String relative = path.substring(base.length());
        relative = relative.trim();
        return relative.toLowerCase();
    }

    public String show(String path) {
        return "[" + relativizeAndClean(path) + "]";
    }
}
"""

# renamed after the cleanup call was dropped from the body
PATHS_RENAMED = """\
public class Paths {
    private String base;

    public String relativize(String path) {
        String relative = path.substring(base.length());
        return relative.toLowerCase();
    }

    public String show(String path) {
        return "[" + relativize(path) + "]";
    }
}
"""

EMPTY = """\
public class Empty {
}
"""

ELVIS = """\
public class Fallback {
    int pick(Integer a, int b) {
        return a ?: b;
    }
}
"""
