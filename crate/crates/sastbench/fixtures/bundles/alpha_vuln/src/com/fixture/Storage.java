package com.fixture.alpha;

import android.content.Context;

public class Storage {
    private void openFileOutputWorldWritable(String filename) throws Exception {
        getContext().openFileOutput(filename, Context.MODE_WORLD_WRITEABLE);
    }

    private Context getContext() {
        return null;
    }
}
